#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "horizon/kb.hpp"
#include "horizon/typed_value.hpp"

namespace horizon {

// The fact that admitted an entity into a set. Points into the owning KB.
struct FactRef {
  std::string key;  // attribute key or relation predicate
  const std::vector<Qualifier>* qualifiers = nullptr;

  bool operator==(const FactRef&) const = default;
};

// Ordered, duplicate-free entity (or graph node) indices. `facts`, when
// present, holds one admitting-fact list per id.
struct EntitySet {
  std::vector<std::size_t> ids;
  std::optional<std::vector<std::vector<FactRef>>> facts;

  bool empty() const { return ids.empty(); }
  bool operator==(const EntitySet&) const = default;
};

using Value = std::variant<EntitySet, TypedValue, std::string, std::int64_t>;

enum class FailureKind {
  kEmptyResult,
  kGrounding,
  kTypeMismatch,
  kContractViolation,
  kUnsupported,
  kBadReference,
  kUnknownTool,
  kNoAnswer,
};

std::string_view to_string(FailureKind kind);

struct Candidate {
  std::string term;
  double score = 0.0;

  bool operator==(const Candidate&) const = default;
};

struct Failure {
  FailureKind kind = FailureKind::kEmptyResult;
  std::string message;
  std::vector<Candidate> candidates;
};

template <class T>
class Outcome {
 public:
  Outcome(T value) : payload_(std::move(value)) {}
  Outcome(Failure failure) : payload_(std::move(failure)) {}

  bool ok() const { return payload_.index() == 0; }
  explicit operator bool() const { return ok(); }
  const T& value() const { return std::get<0>(payload_); }
  T& value() { return std::get<0>(payload_); }
  const Failure& failure() const { return std::get<1>(payload_); }

 private:
  std::variant<T, Failure> payload_;
};

inline Failure fail(FailureKind kind, std::string message, std::vector<Candidate> candidates = {}) {
  return Failure{kind, std::move(message), std::move(candidates)};
}

// What one tool call produced. `text` is exactly what enters the history.
struct Observation {
  bool ok = false;
  std::optional<Value> value;
  std::string text;
  std::optional<Failure> failure;
};

}  // namespace horizon
