#include "ovd/rejection.hpp"

#include <numeric>

#include <fmt/format.h>

#include "ovd/error.hpp"
#include "ovd/rewards.hpp"

namespace ovd {

std::string_view to_string(TestMode mode) {
  return mode == TestMode::deterministic ? "det" : "sampled";
}

TestMode parse_test_mode(std::string_view text) {
  if (text == "det" || text == "deterministic") return TestMode::deterministic;
  if (text == "sampled" || text == "score_sampled") return TestMode::sampled;
  throw ConfigError(fmt::format("unknown test mode '{}' (expected det or sampled)", text));
}

void RejectionConfig::validate(int v) const {
  if (theta_train < 0 || theta_train > v) {
    throw ConfigError(fmt::format("rejection.theta_train={} outside [0, {}]", theta_train, v));
  }
  if (theta_test < 0 || theta_test > v) {
    throw ConfigError(fmt::format("rejection.theta_test={} outside [0, {}]", theta_test, v));
  }
  if (max_test_retries < 1) throw ConfigError("rejection.max_test_retries must be >= 1");
  if (!(qa_f1_floor >= 0.0 && qa_f1_floor <= 1.0)) {
    throw ConfigError("rejection.qa_f1_floor must lie in [0, 1]");
  }
}

bool accept(int score, int theta) { return score >= theta; }

bool is_correct(double reward, TaskKind kind, double qa_f1_floor) {
  return kind == TaskKind::math ? reward >= 1.0 : reward >= qa_f1_floor;
}

Rng member_stream(const GroupKey& key, std::size_t member, StreamPurpose purpose) {
  return Rng::derive(key.seed, {key.step, key.slot, static_cast<std::uint64_t>(member),
                                static_cast<std::uint64_t>(purpose)});
}

GroupMember build_member(const Problem& problem, const Environment& env,
                         const PolicyParams& policy, const TeacherConfig& teacher,
                         const RejectionConfig& rejection, int max_steps, const GroupKey& key,
                         std::size_t member) {
  auto student_rng = member_stream(key, member, StreamPurpose::student);
  auto score_rng = member_stream(key, member, StreamPurpose::score);

  GroupMember m;
  m.trajectory = sample_trajectory(policy, env, problem, student_rng, max_steps);
  m.student_score = acceptance_score(m.trajectory, problem, teacher, true, score_rng);
  m.student_reward = reward(m.trajectory, problem);
  m.accepted = accept(m.student_score, rejection.theta_train) &&
               (!rejection.reject_on_incorrect ||
                is_correct(m.student_reward, problem.kind, rejection.qa_f1_floor));
  if (m.accepted) {
    m.score = m.student_score;
    m.reward = m.student_reward;
    m.source = Source::student;
    return m;
  }
  auto teacher_rng = member_stream(key, member, StreamPurpose::teacher);
  m.trajectory = teacher_rollout(problem, env, teacher, teacher_rng);
  m.score = discretize_score(quality(m.trajectory, problem), teacher.v);
  m.reward = reward(m.trajectory, problem);
  m.source = Source::teacher;
  return m;
}

GroupBatch build_training_group(const Problem& problem, const Environment& env,
                                const PolicyParams& policy, const TeacherConfig& teacher,
                                const RejectionConfig& rejection, int n, int max_steps,
                                const GroupKey& key) {
  if (n < 2) throw ContractViolation(fmt::format("group size {} must be >= 2", n));
  GroupBatch batch;
  batch.problem_id = problem.id;
  batch.members.reserve(static_cast<std::size_t>(n));
  std::size_t accepted = 0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
    batch.members.push_back(
        build_member(problem, env, policy, teacher, rejection, max_steps, key, j));
    if (batch.members.back().accepted) ++accepted;
  }
  batch.alpha_contrib = static_cast<double>(accepted) / static_cast<double>(n);
  return batch;
}

double acceptance_rate(std::span<const double> alpha_contribs) {
  if (alpha_contribs.empty()) throw ContractViolation("acceptance_rate: empty window");
  return std::accumulate(alpha_contribs.begin(), alpha_contribs.end(), 0.0) /
         static_cast<double>(alpha_contribs.size());
}

double acceptance_rate(std::span<const GroupBatch> window) {
  if (window.empty()) throw ContractViolation("acceptance_rate: empty window");
  double sum = 0.0;
  for (const auto& g : window) sum += g.alpha_contrib;
  return sum / static_cast<double>(window.size());
}

FilterResult test_time_filter(const Problem& problem, const Environment& env,
                              const PolicyParams& policy, const TeacherConfig& teacher,
                              const RejectionConfig& rejection, int max_steps,
                              const GroupKey& key) {
  FilterResult r;
  const bool sampled = rejection.test_mode == TestMode::sampled;
  for (int attempt = 0; attempt < rejection.max_test_retries; ++attempt) {
    const auto a = static_cast<std::size_t>(attempt);
    auto student_rng = member_stream(key, a, StreamPurpose::student);
    auto score_rng = member_stream(key, a, StreamPurpose::score);
    r.trajectory = sample_trajectory(policy, env, problem, student_rng, max_steps);
    r.attempts = attempt + 1;
    if (rejection.theta_test == 0) return r;
    r.last_score = acceptance_score(r.trajectory, problem, teacher, sampled, score_rng);
    if (accept(r.last_score, rejection.theta_test)) return r;
  }
  auto teacher_rng = member_stream(key, 0, StreamPurpose::teacher);
  r.trajectory = teacher_rollout(problem, env, teacher, teacher_rng);
  r.intervened = true;
  return r;
}

}  // namespace ovd
