#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "horizon/task.hpp"

namespace horizon {

enum class MatchLabel { kCorrect, kPartiallyCorrect, kIncorrect, kRefusal };

std::string_view to_string(MatchLabel label);
std::optional<MatchLabel> parse_match_label(std::string_view text);

// Escalation hook for answers the mechanical rules cannot settle (partial or
// incorrect). Returning nullopt keeps the mechanical label.
using AnswerJudge = std::function<std::optional<MatchLabel>(std::string_view predicted,
                                                            std::span<const std::string> gold)>;

// Mechanical rubric: each gold value must appear (case-insensitive, on word
// boundaries) in the prediction. Predictions that list several items with ';'
// or newlines are treated as sets, and items matching no gold value count as
// extra. entity-id-or-name gold of the form "id (name)" matches on either
// part; numeric gold matches any number in the prediction with the same value.
MatchLabel match_answer(std::string_view predicted, std::span<const std::string> gold, MatchMode mode,
                        const AnswerJudge& judge = nullptr);

}  // namespace horizon
