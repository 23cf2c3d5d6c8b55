#include "horizon/answer_match.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "horizon/text.hpp"

namespace horizon {
namespace {

constexpr std::array<std::string_view, 7> kRefusalMarkers = {
    "i don't know", "i do not know", "cannot answer", "can't answer", "unable to answer", "no answer", "unknown",
};

// Lowercase with whitespace runs collapsed.
std::string fold(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : trim(text)) {
    if (is_space(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(ascii_lower(c));
  }
  return out;
}

bool contains_term(std::string_view hay, std::string_view needle) {
  if (needle.empty()) return false;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) {
    const bool left = pos == 0 || !is_alnum(hay[pos - 1]) || !is_alnum(needle.front());
    const auto end = pos + needle.size();
    const bool right = end == hay.size() || !is_alnum(hay[end]) || !is_alnum(needle.back());
    if (left && right) return true;
  }
  return false;
}

std::vector<double> numbers_in(std::string_view text) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool sign = text[i] == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (!sign && !std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (i > 0 && std::isalpha(static_cast<unsigned char>(text[i - 1]))) {
      // Digits glued to letters (ids such as m.02686wj) are not quantities.
      while (i < text.size() && (is_alnum(text[i]) || text[i] == '.')) ++i;
      continue;
    }
    std::string num;
    if (sign) num.push_back(text[i++]);
    while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == ',')) {
      if (text[i] != ',') num.push_back(text[i]);
      ++i;
    }
    if (i + 1 < text.size() && text[i] == '.' && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      num.push_back(text[i++]);
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) num.push_back(text[i++]);
    }
    out.push_back(std::strtod(num.c_str(), nullptr));
  }
  return out;
}

bool same_number(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

// Surface forms a gold value may take.
std::vector<std::string> alternatives(std::string_view gold, MatchMode mode) {
  std::vector<std::string> out{fold(gold)};
  if (mode == MatchMode::kEntityIdOrName) {
    const auto g = trim(gold);
    const auto open = g.find(" (");
    if (open != std::string_view::npos && g.back() == ')') {
      out.push_back(fold(g.substr(0, open)));
      out.push_back(fold(g.substr(open + 2, g.size() - open - 3)));
    }
  }
  return out;
}

bool gold_in(std::string_view text, std::string_view gold, MatchMode mode) {
  const auto hay = fold(text);
  if (mode == MatchMode::kNumeric) {
    const auto want = numbers_in(gold);
    if (!want.empty()) {
      for (double v : numbers_in(text)) {
        if (same_number(v, want.front())) return true;
      }
      return false;
    }
  }
  for (const auto& alt : alternatives(gold, mode)) {
    if (contains_term(hay, alt)) return true;
  }
  return false;
}

std::vector<std::string> items_of(std::string_view predicted) {
  std::vector<std::string> items;
  std::string current;
  for (char c : predicted) {
    if (c == ';' || c == '\n') {
      if (!trim(current).empty()) items.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!trim(current).empty()) items.emplace_back(trim(current));
  return items;
}

}  // namespace

std::string_view to_string(MatchMode mode) {
  switch (mode) {
    case MatchMode::kExactSet:
      return "exact-set";
    case MatchMode::kNumeric:
      return "numeric";
    case MatchMode::kEntityIdOrName:
      return "entity-id-or-name";
  }
  return "unknown";
}

std::optional<MatchMode> parse_match_mode(std::string_view text) {
  for (auto m : {MatchMode::kExactSet, MatchMode::kNumeric, MatchMode::kEntityIdOrName}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

std::string_view to_string(MatchLabel label) {
  switch (label) {
    case MatchLabel::kCorrect:
      return "correct";
    case MatchLabel::kPartiallyCorrect:
      return "partially_correct";
    case MatchLabel::kIncorrect:
      return "incorrect";
    case MatchLabel::kRefusal:
      return "refusal";
  }
  return "unknown";
}

std::optional<MatchLabel> parse_match_label(std::string_view text) {
  for (auto l : {MatchLabel::kCorrect, MatchLabel::kPartiallyCorrect, MatchLabel::kIncorrect, MatchLabel::kRefusal}) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

MatchLabel match_answer(std::string_view predicted, std::span<const std::string> gold, MatchMode mode,
                        const AnswerJudge& judge) {
  if (trim(predicted).empty()) return MatchLabel::kRefusal;
  std::size_t found = 0;
  for (const auto& g : gold) {
    if (gold_in(predicted, g, mode)) ++found;
  }
  MatchLabel label;
  if (found == 0) {
    const auto folded = fold(predicted);
    bool refusal = false;
    for (auto marker : kRefusalMarkers) refusal = refusal || contains_term(folded, marker);
    label = refusal ? MatchLabel::kRefusal : MatchLabel::kIncorrect;
  } else if (found < gold.size()) {
    label = MatchLabel::kPartiallyCorrect;
  } else {
    label = MatchLabel::kCorrect;
    const auto items = items_of(predicted);
    if (items.size() > 1) {
      for (const auto& item : items) {
        bool any = false;
        for (const auto& g : gold) any = any || gold_in(item, g, mode);
        if (!any) {
          label = MatchLabel::kPartiallyCorrect;
          break;
        }
      }
    }
  }
  if (judge && (label == MatchLabel::kPartiallyCorrect || label == MatchLabel::kIncorrect)) {
    if (auto verdict = judge(predicted, gold)) return *verdict;
  }
  return label;
}

}  // namespace horizon
