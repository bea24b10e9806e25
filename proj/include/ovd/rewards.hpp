#pragma once

// Outcome rewards: word-overlap F1 for qa, exact match for math.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ovd/tasks.hpp"

namespace ovd {

inline constexpr double kNumericTolerance = 1e-6;

// Lowercased words with punctuation removed; words that become empty are
// dropped.
std::vector<std::string> normalize_words(std::span<const std::string> tokens);

// Multiset-intersection F1 over normalized words. Both empty gives 1.
double f1_reward(std::span<const std::string> answer, std::span<const std::string> gold);

// Parses an integer, decimal or simple rational "p/q".
std::optional<double> parse_number(std::string_view text);

// 1 when the sequences agree element-wise: numerically within
// kNumericTolerance when both elements parse as numbers, otherwise by
// whitespace- and case-folded string equality. An empty answer gives 0.
double exact_match_reward(std::span<const std::string> answer,
                          std::span<const std::string> gold);

// Dispatches on problem kind; truncated trajectories score 0.
double reward(const Trajectory& trajectory, const Problem& problem);

}  // namespace ovd
