#include "horizon/mock_tools.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "horizon/json_io.hpp"
#include "horizon/kb.hpp"
#include "horizon/text.hpp"

namespace horizon {
namespace {

Failure unsupported(std::string_view instruction) {
  return fail(FailureKind::kUnsupported, "Unsupported reasoning instruction: " + std::string(instruction));
}

// Splits "head(a, b, c)" into head and raw argument strings.
bool split_call(std::string_view text, std::string& head, std::vector<std::string>& args) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') return false;
  head = to_lower(trim(text.substr(0, open)));
  args.clear();
  for (auto& part : split(text.substr(open + 1, text.size() - open - 2), ',')) {
    args.emplace_back(trim(part));
  }
  return !head.empty();
}

std::string bind_arg(std::string_view arg, const std::map<std::size_t, std::string>& bound) {
  return std::string(trim(substitute_refs(arg, bound)));
}

}  // namespace

std::string normalize_question(std::string_view question) {
  std::string out;
  bool pending_space = false;
  for (char c : question) {
    if (is_alnum(c)) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back(ascii_lower(c));
    } else if (c != '\'') {
      pending_space = true;
    }
  }
  return out;
}

MockCorpus::MockCorpus(std::vector<MockDocument> documents) : documents_(std::move(documents)) {
  std::set<std::string> titles;
  for (const auto& doc : documents_) {
    if (!titles.insert(doc.title).second) throw CorpusError("duplicate document title '" + doc.title + "'");
  }
}

std::vector<std::size_t> MockCorpus::rank(std::string_view question, const SimilarityProvider& similarity) const {
  std::vector<double> scores;
  scores.reserve(documents_.size());
  for (const auto& doc : documents_) scores.push_back(similarity.similarity(question, doc.title + " " + doc.text));
  std::vector<std::size_t> order(documents_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

MockCorpus load_corpus(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw CorpusError("corpus is not valid JSON at byte " + std::to_string(e.byte));
  }
  if (!root.is_object() || !root.contains("documents") || !root["documents"].is_array()) {
    throw CorpusError("corpus must be an object with a 'documents' list");
  }
  std::vector<MockDocument> docs;
  for (std::size_t i = 0; i < root["documents"].size(); ++i) {
    const auto& node = root["documents"][i];
    const auto where = "documents[" + std::to_string(i) + "]";
    if (!node.is_object() || !node.contains("title") || !node["title"].is_string()) {
      throw CorpusError(where + ": missing string 'title'");
    }
    MockDocument doc;
    doc.title = node["title"].get<std::string>();
    doc.text = node.value("text", std::string());
    if (node.contains("answers")) {
      if (!node["answers"].is_object()) throw CorpusError(where + ".answers must be an object");
      for (const auto& [question, answer] : node["answers"].items()) {
        if (!answer.is_string()) throw CorpusError(where + ".answers['" + question + "'] must be a string");
        doc.answers[normalize_question(question)] = answer.get<std::string>();
      }
    }
    docs.push_back(std::move(doc));
  }
  return MockCorpus(std::move(docs));
}

MockCorpus load_corpus_file(const std::string& path) { return load_corpus(read_file(path)); }

Outcome<std::string> mock_search(const MockCorpus& corpus, std::string_view question, std::size_t k,
                                 const SimilarityProvider& similarity) {
  const auto key = normalize_question(question);
  const auto order = corpus.rank(question, similarity);
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    const auto& doc = corpus.documents()[order[i]];
    if (auto it = doc.answers.find(key); it != doc.answers.end()) return it->second;
  }
  return fail(FailureKind::kEmptyResult, "Failed to find the answer to '" + std::string(trim(question)) +
                                             "'. No supporting information found in the top " +
                                             std::to_string(k) + " retrieved documents.");
}

Outcome<std::string> mock_reasoning(std::string_view instruction, const std::map<std::size_t, std::string>& bound) {
  std::string head;
  std::vector<std::string> raw;
  if (!split_call(instruction, head, raw)) return unsupported(substitute_refs(instruction, bound));
  std::vector<std::string> args;
  for (const auto& a : raw) args.push_back(bind_arg(a, bound));
  auto ordered = [&](const std::string& a, const std::string& b) -> Outcome<std::strong_ordering> {
    try {
      return order_typed(parse_literal(a), parse_literal(b));
    } catch (const ValueError& e) {
      return fail(FailureKind::kTypeMismatch, "cannot compare '" + a + "' and '" + b + "': " + e.what());
    }
  };

  if (head == "compare" && args.size() == 3) {
    const auto mode = to_lower(args[2]);
    const bool want_low = mode == "earlier" || mode == "smaller";
    if (!want_low && mode != "later" && mode != "larger") return unsupported(substitute_refs(instruction, bound));
    auto cmp = ordered(args[0], args[1]);
    if (!cmp) return cmp.failure();
    const bool first_low = cmp.value() != std::strong_ordering::greater;
    const bool first_high = cmp.value() != std::strong_ordering::less;
    return want_low ? (first_low ? args[0] : args[1]) : (first_high ? args[0] : args[1]);
  }
  if (head == "equal" && args.size() == 2) {
    return std::string(normalize_question(args[0]) == normalize_question(args[1]) ? "yes" : "no");
  }
  if (head == "pick" && args.size() >= 2) {
    const auto mode = to_lower(args[0]);
    const bool want_low = mode == "smallest" || mode == "earliest";
    if (!want_low && mode != "largest" && mode != "latest") return unsupported(substitute_refs(instruction, bound));
    // Labels come from the template; values may be bound.
    std::vector<std::pair<std::string, std::string>> options;
    for (std::size_t i = 1; i < raw.size(); ++i) {
      const auto eq = raw[i].find('=');
      if (eq == std::string::npos) return unsupported(substitute_refs(instruction, bound));
      options.emplace_back(bind_arg(raw[i].substr(0, eq), bound), bind_arg(raw[i].substr(eq + 1), bound));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < options.size(); ++i) {
      auto cmp = ordered(options[i].second, options[best].second);
      if (!cmp) return cmp.failure();
      if (want_low ? cmp.value() == std::strong_ordering::less : cmp.value() == std::strong_ordering::greater) {
        best = i;
      }
    }
    return options[best].first;
  }
  return unsupported(substitute_refs(instruction, bound));
}

ToolCatalog qa_catalog() {
  std::vector<ToolSpec> tools;
  tools.push_back({"search",
                   "Answers a single-hop question from retrieved documents. Use $i inside the question to insert an "
                   "earlier output.",
                   {ParamSpec{"question", ParamKind::kText, "A single-hop question", std::nullopt, true, {}}}});
  tools.push_back(
      {"reasoning",
       "Deterministic comparison over earlier outputs: compare(a, b, earlier|later|larger|smaller), equal(a, b), "
       "or pick(largest|smallest|earliest|latest, label=value, ...).",
       {ParamSpec{"instruction", ParamKind::kText, "One of the supported templates", std::nullopt, true, {}}}});
  return ToolCatalog(std::move(tools));
}

QaEnvironment::QaEnvironment(const MockCorpus& corpus, std::size_t top_k,
                             std::shared_ptr<const SimilarityProvider> similarity)
    : corpus_(corpus),
      top_k_(std::max<std::size_t>(top_k, 1)),
      similarity_(similarity ? std::move(similarity) : std::make_shared<TrigramSimilarity>()),
      catalog_(qa_catalog()) {}

std::string QaEnvironment::render(const Value& value) const {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* tv = std::get_if<TypedValue>(&value)) return tv->to_string();
  if (const auto* n = std::get_if<std::int64_t>(&value)) return std::to_string(*n);
  return std::to_string(std::get<EntitySet>(value).ids.size()) + " entities";
}

Observation QaEnvironment::invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t) const {
  if (tool == "search") {
    auto it = args.find("question");
    if (it == args.end()) return failure(fail(FailureKind::kContractViolation, "search needs a question"));
    auto r = mock_search(corpus_, it->second.text, top_k_, *similarity_);
    return r ? success(*this, Value(r.value())) : failure(r.failure());
  }
  if (tool == "reasoning") {
    auto it = args.find("instruction");
    if (it == args.end()) return failure(fail(FailureKind::kContractViolation, "reasoning needs an instruction"));
    const auto& arg = it->second;
    auto r = mock_reasoning(arg.raw.empty() ? arg.text : arg.raw, arg.embedded);
    return r ? success(*this, Value(r.value())) : failure(r.failure());
  }
  return failure(fail(FailureKind::kUnknownTool, "unknown tool '" + std::string(tool) + "'"));
}

}  // namespace horizon
