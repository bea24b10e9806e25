#include <gtest/gtest.h>

#include "ovd/rewards.hpp"
#include "ovd/tasks.hpp"

namespace ovd {
namespace {

using W = std::vector<std::string>;

TEST(F1, PartialOverlap) {
  EXPECT_NEAR(f1_reward(W{"the", "eiffel", "tower"}, W{"eiffel", "tower"}), 0.8, 1e-12);
}

TEST(F1, NormalizesCaseAndPunctuation) {
  EXPECT_EQ(f1_reward(W{"Paris."}, W{"paris"}), 1.0);
}

TEST(F1, EmptyCases) {
  EXPECT_EQ(f1_reward(W{}, W{}), 1.0);
  EXPECT_EQ(f1_reward(W{"x"}, W{}), 0.0);
  EXPECT_EQ(f1_reward(W{}, W{"x"}), 0.0);
}

TEST(F1, CountsMultiplicity) {
  // overlap 1: precision 1/2, recall 1
  EXPECT_NEAR(f1_reward(W{"a", "a"}, W{"a"}), 2.0 / 3.0, 1e-12);
}

TEST(F1, BoundedAndSymmetric) {
  const W a{"a", "b", "c", "d"}, b{"b", "d", "e"};
  const double f = f1_reward(a, b);
  EXPECT_GE(f, 0.0);
  EXPECT_LE(f, 1.0);
  EXPECT_DOUBLE_EQ(f, f1_reward(b, a));
}

TEST(ParseNumber, DecimalsAndFractions) {
  EXPECT_EQ(parse_number("0.5"), 0.5);
  EXPECT_EQ(parse_number("1/2"), 0.5);
  EXPECT_EQ(parse_number("-3"), -3.0);
  EXPECT_FALSE(parse_number("1e3").has_value());
  EXPECT_FALSE(parse_number("inf").has_value());
  EXPECT_FALSE(parse_number("1/0").has_value());
  EXPECT_FALSE(parse_number("abc").has_value());
}

TEST(ExactMatch, NumericEquivalence) {
  EXPECT_EQ(exact_match_reward(W{"0.5"}, W{"1/2"}), 1.0);
  EXPECT_EQ(exact_match_reward(W{"2"}, W{"2.0000001"}), 1.0);
  EXPECT_EQ(exact_match_reward(W{"2"}, W{"2.01"}), 0.0);
}

TEST(ExactMatch, LengthMismatchAndEmpty) {
  EXPECT_EQ(exact_match_reward(W{"1", "2"}, W{"1"}), 0.0);
  EXPECT_EQ(exact_match_reward(W{}, W{"1"}), 0.0);
}

TEST(Reward, TruncatedIsZero) {
  const auto p = generate_math_problem(1, 2, 10);
  Trajectory t;
  t.answer = p.gold_answer;
  EXPECT_EQ(reward(t, p), 1.0);
  t.truncated = true;
  EXPECT_EQ(reward(t, p), 0.0);
}

}  // namespace
}  // namespace ovd
