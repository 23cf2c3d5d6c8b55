#include "horizon/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "horizon/graph_store.hpp"
#include "horizon/kb.hpp"
#include "horizon/text.hpp"

namespace horizon {

std::string_view to_string(Namespace ns) {
  switch (ns) {
    case Namespace::kEntityName:
      return "entity-name";
    case Namespace::kConcept:
      return "concept";
    case Namespace::kAttributeKey:
      return "attribute-key";
    case Namespace::kRelation:
      return "relation";
    case Namespace::kQualifierKey:
      return "qualifier-key";
  }
  return "entity-name";
}

std::optional<Namespace> parse_namespace(std::string_view text) {
  for (auto ns : {Namespace::kEntityName, Namespace::kConcept, Namespace::kAttributeKey,
                  Namespace::kRelation, Namespace::kQualifierKey}) {
    if (to_string(ns) == text) return ns;
  }
  return std::nullopt;
}

std::string_view to_string(Robustness mode) { return mode == Robustness::kHigh ? "high" : "low"; }

std::optional<Robustness> parse_robustness(std::string_view text) {
  if (text == "high") return Robustness::kHigh;
  if (text == "low") return Robustness::kLow;
  return std::nullopt;
}

std::string_view to_string(GroundStatus status) {
  switch (status) {
    case GroundStatus::kExact:
      return "exact";
    case GroundStatus::kSoftMatched:
      return "soft-matched";
    case GroundStatus::kFailed:
      return "failed";
  }
  return "failed";
}

std::string normalize_term(std::string_view term) {
  std::string out;
  bool pending_space = false;
  for (char c : term) {
    if (is_space(c) || c == '_' || c == '-') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ascii_lower(c));
  }
  return out;
}

namespace {

std::set<std::string> trigrams(const std::string& normalized) {
  std::set<std::string> out;
  const std::string padded = " " + normalized + " ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    out.insert(padded.substr(i, 3));
  }
  return out;
}

}  // namespace

double trigram_jaccard(std::string_view a, std::string_view b) {
  const auto na = normalize_term(a);
  const auto nb = normalize_term(b);
  if (na == nb) return 1.0;
  const auto ta = trigrams(na);
  const auto tb = trigrams(nb);
  std::size_t shared = 0;
  for (const auto& t : ta) shared += tb.count(t);
  const std::size_t total = ta.size() + tb.size() - shared;
  if (total == 0) return 0.0;
  const double score = static_cast<double>(shared) / static_cast<double>(total);
  // Different strings can share a trigram set ("aaa" / "aaaa"); keep 1.0 for equality only.
  return std::min(score, std::nextafter(1.0, 0.0));
}

std::optional<std::size_t> ThresholdValidator::accept(std::string_view, Namespace,
                                                      std::span<const Candidate> candidates) const {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].score >= threshold_) return i;
  }
  return std::nullopt;
}

SchemaIndex SchemaIndex::build(const KnowledgeBase& kb) {
  std::set<std::string> names, concepts, attributes, relations, qualifiers;
  for (const auto& c : kb.concepts()) concepts.insert(c.name);
  for (const auto& e : kb.entities()) {
    names.insert(e.name);
    for (const auto& a : e.attributes) {
      attributes.insert(a.key);
      for (const auto& q : a.qualifiers) qualifiers.insert(q.key);
    }
    for (const auto& r : e.relations) {
      relations.insert(r.predicate);
      for (const auto& q : r.qualifiers) qualifiers.insert(q.key);
    }
  }
  SchemaIndex index;
  index.terms_[Namespace::kEntityName].assign(names.begin(), names.end());
  index.terms_[Namespace::kConcept].assign(concepts.begin(), concepts.end());
  index.terms_[Namespace::kAttributeKey].assign(attributes.begin(), attributes.end());
  index.terms_[Namespace::kRelation].assign(relations.begin(), relations.end());
  index.terms_[Namespace::kQualifierKey].assign(qualifiers.begin(), qualifiers.end());
  return index;
}

SchemaIndex SchemaIndex::build(const GraphStore& store) {
  std::set<std::string> names, classes, attributes, relations;
  for (const auto& n : store.nodes()) {
    names.insert(n.name);
    classes.insert(n.classes.begin(), n.classes.end());
  }
  for (const auto& t : store.triples()) {
    relations.insert(t.predicate);
    if (!t.object_is_node()) attributes.insert(t.predicate);
  }
  SchemaIndex index;
  index.terms_[Namespace::kEntityName].assign(names.begin(), names.end());
  index.terms_[Namespace::kConcept].assign(classes.begin(), classes.end());
  index.terms_[Namespace::kAttributeKey].assign(attributes.begin(), attributes.end());
  index.terms_[Namespace::kRelation].assign(relations.begin(), relations.end());
  return index;
}

const std::vector<std::string>& SchemaIndex::terms(Namespace ns) const {
  auto it = terms_.find(ns);
  if (it == terms_.end()) {
    throw GroundingError("namespace '" + std::string(to_string(ns)) + "' does not exist in this schema");
  }
  return it->second;
}

bool SchemaIndex::contains(Namespace ns, std::string_view term) const {
  const auto& list = terms(ns);
  return std::binary_search(list.begin(), list.end(), term);
}

Grounder::Grounder(const SchemaIndex& index, Robustness mode,
                   std::shared_ptr<const SimilarityProvider> similarity,
                   std::shared_ptr<const CandidateValidator> validator)
    : index_(index),
      mode_(mode),
      similarity_(similarity ? std::move(similarity) : std::make_shared<TrigramSimilarity>()),
      validator_(validator ? std::move(validator) : std::make_shared<ThresholdValidator>()) {}

std::vector<Candidate> Grounder::nearest(std::string_view term, Namespace ns, std::size_t n) const {
  const auto& terms = index_.terms(ns);
  std::vector<Candidate> scored;
  scored.reserve(terms.size());
  for (const auto& t : terms) scored.push_back(Candidate{t, similarity_->similarity(term, t)});
  // Terms are already sorted, so a stable sort breaks score ties by term order.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (scored.size() > n) scored.resize(n);
  return scored;
}

GroundingResult Grounder::compute(std::string_view term, Namespace ns) const {
  GroundingResult result;
  result.mode = mode_;
  if (index_.contains(ns, term)) {
    result.status = GroundStatus::kExact;
    result.matched = std::string(term);
    return result;
  }
  if (mode_ == Robustness::kLow) {
    result.candidates = nearest(term, ns, kLowCandidates);
    return result;
  }
  result.candidates = nearest(term, ns, kHighCandidates);
  if (auto accepted = validator_->accept(term, ns, result.candidates);
      accepted && *accepted < result.candidates.size()) {
    result.status = GroundStatus::kSoftMatched;
    result.matched = result.candidates[*accepted].term;
  }
  return result;
}

GroundingResult Grounder::ground(std::string_view term, Namespace ns) const {
  index_.terms(ns);  // unknown namespace throws before touching the cache
  std::pair<std::string, Namespace> key{std::string(term), ns};
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto result = compute(term, ns);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), std::move(result)).first->second;
}

std::string describe_grounding_failure(std::string_view term, Namespace ns,
                                       const GroundingResult& result) {
  std::string label(to_string(ns));
  replace_all(label, "-", " ");
  std::ostringstream out;
  out << "'" << term << "' is not a known " << label << ".";
  if (result.candidates.empty()) {
    out << " No candidates available.";
    return out.str();
  }
  out << " Candidates: ";
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    if (i) out << ", ";
    char score[16];
    std::snprintf(score, sizeof(score), "%.2f", result.candidates[i].score);
    out << result.candidates[i].term << " (" << score << ")";
  }
  return out.str();
}

}  // namespace horizon
