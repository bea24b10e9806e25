#include <gtest/gtest.h>

#include <cmath>

#include "ovd/error.hpp"
#include "ovd/rejection.hpp"
#include "ovd/rewards.hpp"

namespace ovd {
namespace {

TEST(Accept, BoundaryThresholds) {
  for (int s = 0; s < 10; ++s) {
    EXPECT_TRUE(accept(s, 0));
    EXPECT_FALSE(accept(s, 10));
    EXPECT_EQ(accept(s, 7), s >= 7);
  }
}

TEST(IsCorrect, MathNeedsFullRewardQaUsesFloor) {
  EXPECT_TRUE(is_correct(1.0, TaskKind::math, 0.3));
  EXPECT_FALSE(is_correct(0.99, TaskKind::math, 0.3));
  EXPECT_TRUE(is_correct(0.3, TaskKind::qa, 0.3));
  EXPECT_FALSE(is_correct(0.29, TaskKind::qa, 0.3));
}

TEST(RejectionConfig, ThresholdsMustLieInScoreRange) {
  RejectionConfig cfg;
  EXPECT_NO_THROW(cfg.validate(10));
  cfg.theta_train = 11;
  EXPECT_THROW(cfg.validate(10), ConfigError);
  cfg = {};
  cfg.theta_test = -1;
  EXPECT_THROW(cfg.validate(10), ConfigError);
}

struct Fixture {
  Problem problem = generate_math_problem(3, 1, 10);
  Environment env = Environment::math(10);
  PolicyParams policy = make_policy(10, 2);
  TeacherConfig teacher = [] {
    TeacherConfig t;
    t.score_temp = 0.0;
    return t;
  }();
};

TEST(TrainingGroup, ThetaZeroKeepsEveryStudent) {
  Fixture f;
  RejectionConfig rej;
  rej.theta_train = 0;
  rej.reject_on_incorrect = false;
  const auto g = build_training_group(f.problem, f.env, f.policy, f.teacher, rej, 16, 4, {0, 1, 0});
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g.alpha_contrib, 1.0);
  for (const auto& m : g.members) EXPECT_EQ(m.source, Source::student);
}

TEST(TrainingGroup, ThetaVReplacesEveryStudentWithOracle) {
  Fixture f;
  RejectionConfig rej;
  rej.theta_train = 10;
  const auto g = build_training_group(f.problem, f.env, f.policy, f.teacher, rej, 16, 4, {0, 1, 0});
  EXPECT_EQ(g.alpha_contrib, 0.0);
  for (const auto& m : g.members) {
    EXPECT_EQ(m.source, Source::teacher);
    EXPECT_EQ(m.reward, 1.0);
    EXPECT_EQ(m.score, 9);
  }
}

TEST(TrainingGroup, AcceptanceRateOfUniformStudent) {
  // Only the oracle step scores 9 under point-mass scoring.
  Fixture f;
  RejectionConfig rej;
  rej.theta_train = 9;
  const int n = 100, groups = 200;
  double sum = 0.0;
  for (int i = 0; i < groups; ++i) {
    const GroupKey key{5, static_cast<std::uint64_t>(i), 0};
    const auto g = build_training_group(f.problem, f.env, f.policy, f.teacher, rej, n, 4, key);
    sum += g.alpha_contrib;
    for (const auto& m : g.members) {
      if (m.source == Source::student) EXPECT_EQ(m.reward, 1.0);
    }
  }
  const double se = std::sqrt(0.1 * 0.9 / (n * groups));
  EXPECT_NEAR(sum / groups, 0.1, 3 * se);
}

TEST(TrainingGroup, RejectOnIncorrectOverridesHighScore) {
  Fixture f;
  f.teacher.score_temp = 50.0;  // scores nearly uniform, so wrong answers often pass theta
  RejectionConfig rej;
  rej.theta_train = 1;
  const auto g = build_training_group(f.problem, f.env, f.policy, f.teacher, rej, 64, 4, {1, 1, 0});
  for (const auto& m : g.members) {
    if (m.accepted) EXPECT_EQ(m.student_reward, 1.0);
  }
}

TEST(TrainingGroup, SameKeySameGroup) {
  Fixture f;
  RejectionConfig rej;
  const GroupKey key{9, 3, 2};
  const auto a = build_training_group(f.problem, f.env, f.policy, f.teacher, rej, 8, 4, key);
  const auto b = build_training_group(f.problem, f.env, f.policy, f.teacher, rej, 8, 4, key);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.members[i].trajectory, b.members[i].trajectory);
}

TEST(TrainingGroup, NeedsTwoMembers) {
  Fixture f;
  EXPECT_THROW(build_training_group(f.problem, f.env, f.policy, f.teacher, {}, 1, 4, {}),
               ContractViolation);
}

TEST(AcceptanceRate, WindowMean) {
  const std::vector<double> contribs{0.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(acceptance_rate(contribs), 0.5);
  EXPECT_THROW(acceptance_rate(std::span<const double>{}), ContractViolation);
}

TEST(TestFilter, ThetaZeroNeverIntervenes) {
  Fixture f;
  RejectionConfig rej;
  rej.theta_test = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto r = test_time_filter(f.problem, f.env, f.policy, f.teacher, rej, 4, {0, i, 0});
    EXPECT_FALSE(r.intervened);
    EXPECT_EQ(r.attempts, 1);
  }
}

TEST(TestFilter, ThetaVAlwaysIntervenes) {
  Fixture f;
  RejectionConfig rej;
  rej.theta_test = 10;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const auto r = test_time_filter(f.problem, f.env, f.policy, f.teacher, rej, 4, {0, i, 0});
    EXPECT_TRUE(r.intervened);
    EXPECT_EQ(r.trajectory.source, Source::teacher);
    EXPECT_EQ(reward(r.trajectory, f.problem), 1.0);
  }
}

TEST(TestFilter, InterventionMonotoneInThetaUnderCommonSamples) {
  Fixture f;
  f.teacher.score_temp = 1.0;
  for (auto mode : {TestMode::deterministic, TestMode::sampled}) {
    for (std::uint64_t i = 0; i < 100; ++i) {
      bool prev = false;
      for (int theta = 0; theta <= 10; ++theta) {
        RejectionConfig rej;
        rej.theta_test = theta;
        rej.test_mode = mode;
        const bool now =
            test_time_filter(f.problem, f.env, f.policy, f.teacher, rej, 4, {0, i, 0}).intervened;
        ASSERT_TRUE(!prev || now) << "problem " << i << " theta " << theta;
        prev = now;
      }
    }
  }
}

TEST(TestFilter, RetriesDrawFreshSamples) {
  Fixture f;
  RejectionConfig rej;
  rej.theta_test = 9;
  rej.max_test_retries = 3;
  const auto r = test_time_filter(f.problem, f.env, f.policy, f.teacher, rej, 4, {0, 0, 0});
  EXPECT_GE(r.attempts, 1);
  EXPECT_LE(r.attempts, 3);
  if (r.intervened) EXPECT_EQ(r.attempts, 3);
}

}  // namespace
}  // namespace ovd
