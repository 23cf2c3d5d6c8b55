#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "horizon/environment.hpp"
#include "horizon/grounding.hpp"

namespace horizon {

struct MockDocument {
  std::string title;
  std::string text;
  std::map<std::string, std::string> answers;  // normalized question -> answer
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercase, punctuation dropped, whitespace collapsed. Keys of
// MockDocument::answers are stored in this form.
std::string normalize_question(std::string_view question);

class MockCorpus {
 public:
  MockCorpus() = default;
  // Throws CorpusError on duplicate titles.
  explicit MockCorpus(std::vector<MockDocument> documents);

  const std::vector<MockDocument>& documents() const { return documents_; }
  bool empty() const { return documents_.empty(); }

  // Document indices by descending similarity of question to title + text;
  // ties keep corpus order.
  std::vector<std::size_t> rank(std::string_view question, const SimilarityProvider& similarity) const;

 private:
  std::vector<MockDocument> documents_;
};

// {"documents": [{"title", "text", "answers": {question: answer}}]}
MockCorpus load_corpus(std::string_view json_text);
MockCorpus load_corpus_file(const std::string& path);

Outcome<std::string> mock_search(const MockCorpus& corpus, std::string_view question, std::size_t k,
                                 const SimilarityProvider& similarity);

// Templates, with arguments separated by commas after `$i` substitution:
//   compare(a, b, earlier|later|larger|smaller)  -> a or b
//   equal(a, b)                                  -> yes | no
//   pick(largest|smallest|earliest|latest, label=value, ...) -> label
// Arguments are split before `$i` tokens are replaced by `bound`, so bound
// values may contain commas.
Outcome<std::string> mock_reasoning(std::string_view instruction, const std::map<std::size_t, std::string>& bound);

ToolCatalog qa_catalog();

class QaEnvironment final : public Environment {
 public:
  QaEnvironment(const MockCorpus& corpus, std::size_t top_k,
                std::shared_ptr<const SimilarityProvider> similarity = nullptr);

  std::string_view kind() const override { return "qa"; }
  const ToolCatalog& catalog() const override { return catalog_; }
  Observation invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t seed) const override;
  std::string render(const Value& value) const override;

  std::size_t top_k() const { return top_k_; }

 private:
  const MockCorpus& corpus_;
  std::size_t top_k_;
  std::shared_ptr<const SimilarityProvider> similarity_;
  ToolCatalog catalog_;
};

}  // namespace horizon
