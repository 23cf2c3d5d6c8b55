#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "horizon/value.hpp"

namespace horizon {

class KnowledgeBase;
class GraphStore;

enum class Namespace { kEntityName, kConcept, kAttributeKey, kRelation, kQualifierKey };
enum class Robustness { kHigh, kLow };
enum class GroundStatus { kExact, kSoftMatched, kFailed };

std::string_view to_string(Namespace ns);
std::optional<Namespace> parse_namespace(std::string_view text);
std::string_view to_string(Robustness mode);
std::optional<Robustness> parse_robustness(std::string_view text);
std::string_view to_string(GroundStatus status);

inline constexpr std::size_t kHighCandidates = 10;
inline constexpr std::size_t kLowCandidates = 1;

// Case-folds, maps '_', '-' and whitespace runs to one space, trims.
std::string normalize_term(std::string_view term);

// Character-trigram Jaccard over the normalized term padded with one space on
// each side. Returns 1.0 exactly when the normalized forms are equal.
double trigram_jaccard(std::string_view a, std::string_view b);

class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double similarity(std::string_view a, std::string_view b) const = 0;
};

class TrigramSimilarity final : public SimilarityProvider {
 public:
  double similarity(std::string_view a, std::string_view b) const override {
    return trigram_jaccard(a, b);
  }
};

// Decides which retrieved candidate (if any) may stand in for the term.
// Candidates arrive ranked by descending score.
class CandidateValidator {
 public:
  virtual ~CandidateValidator() = default;
  virtual std::optional<std::size_t> accept(std::string_view term, Namespace ns,
                                            std::span<const Candidate> candidates) const = 0;
};

class ThresholdValidator final : public CandidateValidator {
 public:
  explicit ThresholdValidator(double threshold = 0.4) : threshold_(threshold) {}
  std::optional<std::size_t> accept(std::string_view term, Namespace ns,
                                    std::span<const Candidate> candidates) const override;
  double threshold() const { return threshold_; }

 private:
  double threshold_;
};

// POSTs {term, namespace, candidates[]} and reads {accepted_index | null}.
class RemoteValidator final : public CandidateValidator {
 public:
  explicit RemoteValidator(std::string endpoint, int timeout_seconds = 30);
  std::optional<std::size_t> accept(std::string_view term, Namespace ns,
                                    std::span<const Candidate> candidates) const override;

 private:
  std::string base_;
  std::string path_;
  int timeout_seconds_;
};

class GroundingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Valid terms per namespace. Namespaces that the source cannot populate at all
// (qualifier keys of a graph store) are absent, which is distinct from empty.
class SchemaIndex {
 public:
  static SchemaIndex build(const KnowledgeBase& kb);
  static SchemaIndex build(const GraphStore& store);

  bool has_namespace(Namespace ns) const { return terms_.contains(ns); }
  // Sorted, unique. Throws GroundingError for an absent namespace.
  const std::vector<std::string>& terms(Namespace ns) const;
  bool contains(Namespace ns, std::string_view term) const;

 private:
  std::map<Namespace, std::vector<std::string>> terms_;
};

struct GroundingResult {
  GroundStatus status = GroundStatus::kFailed;
  std::string matched;
  std::vector<Candidate> candidates;
  Robustness mode = Robustness::kHigh;

  bool ok() const { return status != GroundStatus::kFailed; }
};

// Exact match first in both modes. High mode retrieves the top candidates and
// lets the validator pick one; low mode never substitutes and reports only the
// best candidate. Results are cached per (term, namespace) for the grounder's
// lifetime so repeated calls inside a run agree.
class Grounder {
 public:
  Grounder(const SchemaIndex& index, Robustness mode,
           std::shared_ptr<const SimilarityProvider> similarity = nullptr,
           std::shared_ptr<const CandidateValidator> validator = nullptr);

  GroundingResult ground(std::string_view term, Namespace ns) const;

  Robustness mode() const { return mode_; }
  const SchemaIndex& index() const { return index_; }

  // Top-n terms of the namespace by similarity, ties by term order.
  std::vector<Candidate> nearest(std::string_view term, Namespace ns, std::size_t n) const;

 private:
  GroundingResult compute(std::string_view term, Namespace ns) const;

  const SchemaIndex& index_;
  Robustness mode_;
  std::shared_ptr<const SimilarityProvider> similarity_;
  std::shared_ptr<const CandidateValidator> validator_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<std::string, Namespace>, GroundingResult, std::less<>> cache_;
};

// Feedback text for a failed grounding, e.g.
// "'employees' is not a known attribute key. Candidates: employee_counts (0.41)".
std::string describe_grounding_failure(std::string_view term, Namespace ns,
                                       const GroundingResult& result);

}  // namespace horizon
