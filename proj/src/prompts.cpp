#include "horizon/prompts.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "horizon/json_io.hpp"
#include "horizon/kb.hpp"
#include "horizon/prompt_assets.inc"
#include "horizon/text.hpp"

namespace horizon {

std::string_view to_string(Horizon horizon) { return horizon == Horizon::kSh ? "sh" : "fh"; }

std::optional<Horizon> parse_horizon(std::string_view text) {
  if (text == "sh") return Horizon::kSh;
  if (text == "fh") return Horizon::kFh;
  return std::nullopt;
}

std::string serialize_history(std::span<const HistoryEntry> history) {
  std::string out;
  for (const auto& e : history) {
    out += std::to_string(e.index);
    out += '\t';
    out += to_wire(e.call);
    out += e.ok ? "\tok\t" : "\terror\t";
    out += e.observation;
    out += '\n';
  }
  return out;
}

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    if (is_space(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name) {
  if (name == "whitespace") return std::make_unique<WhitespaceTokenizer>();
  return nullptr;
}

std::size_t count_tokens(const Tokenizer& tokenizer, std::span<const Message> messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += tokenizer.count(m.content);
  return n;
}

std::vector<Demonstration> load_demonstrations(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error("demonstrations are not valid JSON at byte " + std::to_string(e.byte));
  }
  if (!root.is_array()) throw std::runtime_error("demonstrations must be a list");
  std::vector<Demonstration> out;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const auto& node = root[i];
    if (!node.is_object() || !node.contains("question") || !node["question"].is_string() || !node.contains("plan")) {
      throw std::runtime_error("demonstrations[" + std::to_string(i) + "] needs 'question' and 'plan'");
    }
    out.push_back({node["question"].get<std::string>(),
                   node["plan"].is_string() ? node["plan"].get<std::string>() : node["plan"].dump()});
  }
  return out;
}

std::vector<Demonstration> load_demonstrations_file(const std::string& path) {
  return load_demonstrations(read_file(path));
}

std::string fill_template(std::string_view tmpl,
                          std::span<const std::pair<std::string_view, std::string_view>> values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    const auto key = tmpl.substr(open + 1, close - open - 1);
    auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
    out.append(tmpl.substr(pos, open - pos));
    if (it != values.end()) {
      out.append(it->second);
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(pos));
  return out;
}

PromptBuilder::PromptBuilder(std::string_view engine_kind, const ToolCatalog& catalog,
                             std::vector<Demonstration> demonstrations,
                             std::shared_ptr<const SimilarityProvider> similarity)
    : tool_definitions_(catalog.with_finish().to_json()),
      demonstrations_(std::move(demonstrations)),
      similarity_(similarity ? std::move(similarity) : std::make_shared<TrigramSimilarity>()) {
  if (engine_kind == "kopl") {
    body_ = k_body_kopl;
  } else if (engine_kind == "atomic") {
    body_ = k_body_atomic;
  } else if (engine_kind == "qa") {
    body_ = k_body_qa;
  } else {
    throw std::invalid_argument("no prompt body for engine '" + std::string(engine_kind) + "'");
  }
}

std::vector<const Demonstration*> PromptBuilder::select_demonstrations(std::string_view question) const {
  std::vector<double> scores;
  for (const auto& d : demonstrations_) scores.push_back(similarity_->similarity(question, d.question));
  std::vector<std::size_t> order(demonstrations_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<const Demonstration*> out;
  for (std::size_t i = 0; i < order.size() && i < kDemonstrationCount; ++i) out.push_back(&demonstrations_[order[i]]);
  return out;
}

std::string PromptBuilder::system_prompt(Horizon horizon, std::string_view question) const {
  std::string demos;
  for (const auto* d : select_demonstrations(question)) {
    if (!demos.empty()) demos += "\n\n";
    demos += "Question: " + d->question + "\nPlan: " + d->plan;
  }
  const std::pair<std::string_view, std::string_view> values[] = {{"tool_definitions", tool_definitions_},
                                                                  {"demonstrations", demos}};
  std::string out(horizon == Horizon::kSh ? k_sh_header : k_fh_header);
  out += "\n\n";
  out += fill_template(body_, values);
  return out;
}

std::string PromptBuilder::question_message(std::string_view question) { return "Question: " + std::string(question); }

std::string PromptBuilder::observation_message(const HistoryEntry& entry) {
  return "Observation $" + std::to_string(entry.index) + ": " + entry.observation;
}

std::string PromptBuilder::execution_result(std::span<const HistoryEntry> history) {
  std::string out;
  for (const auto& e : history) {
    if (!out.empty()) out += '\n';
    out += "[" + std::to_string(e.index) + "] " + to_wire(e.call) + "\n    -> " + e.observation;
  }
  return out;
}

std::string PromptBuilder::replan_message(std::span<const HistoryEntry> history, std::size_t start_index) {
  const auto result = execution_result(history);
  const auto start = std::to_string(start_index);
  const std::pair<std::string_view, std::string_view> values[] = {{"execution_result", result}, {"start_index", start}};
  return fill_template(k_replan, values);
}

std::string PromptBuilder::invalid_format_message(std::string_view reason) {
  std::string out(k_invalid_format);
  if (!reason.empty()) {
    out += "\nReason: ";
    out += reason;
  }
  return out;
}

}  // namespace horizon
