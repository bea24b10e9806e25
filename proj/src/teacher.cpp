#include "ovd/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "ovd/error.hpp"

namespace ovd {

std::string_view to_string(ScoringLevel level) {
  return level == ScoringLevel::trajectory ? "trajectory" : "step";
}

ScoringLevel parse_scoring_level(std::string_view text) {
  if (text == "trajectory") return ScoringLevel::trajectory;
  if (text == "step") return ScoringLevel::step;
  throw ConfigError(fmt::format("unknown scoring level '{}' (expected trajectory or step)", text));
}

void TeacherConfig::validate() const {
  if (v < 2) throw ConfigError(fmt::format("teacher.v must be >= 2, got {}", v));
  if (!(score_temp >= 0.0) || !std::isfinite(score_temp)) {
    throw ConfigError("teacher.score_temp must be a finite non-negative number");
  }
  if (!(error_rate >= 0.0 && error_rate <= 1.0)) {
    throw ConfigError("teacher.error_rate must lie in [0, 1]");
  }
}

namespace {

std::vector<Step> policy_steps(const Trajectory& t) {
  std::vector<Step> out;
  for (const auto& s : t.steps) {
    if (s.kind != StepKind::doc) out.push_back(s);
  }
  return out;
}

std::size_t matched_prefix(const std::vector<Step>& steps, const std::vector<Step>& oracle) {
  std::size_t m = 0;
  while (m < steps.size() && m < oracle.size() && steps[m] == oracle[m]) ++m;
  return m;
}

}  // namespace

double quality(const Trajectory& trajectory, const Problem& problem) {
  const auto n = problem.oracle_steps.size();
  if (n == 0) throw ContractViolation(fmt::format("problem {} has no oracle steps", problem.id));
  const auto steps = policy_steps(trajectory);
  auto m = matched_prefix(steps, problem.oracle_steps);
  if (trajectory.truncated || !trajectory.complete()) m = std::min(m, n - 1);
  return static_cast<double>(m) / static_cast<double>(n);
}

std::vector<double> prefix_qualities(const Trajectory& trajectory, const Problem& problem) {
  const auto steps = policy_steps(trajectory);
  const auto m = matched_prefix(steps, problem.oracle_steps);
  std::vector<double> q(steps.size());
  for (std::size_t k = 1; k <= steps.size(); ++k) {
    q[k - 1] = static_cast<double>(std::min(m, k)) / static_cast<double>(k);
  }
  return q;
}

int discretize_score(double q, int v) {
  if (v < 2) throw ContractViolation(fmt::format("score vocabulary v={} must be >= 2", v));
  if (!(q >= 0.0 && q <= 1.0)) {
    throw ContractViolation(fmt::format("quality {} outside [0, 1]", q));
  }
  // The 1e-9 guard keeps exact fractions such as 7/9 * 9 from rounding below
  // their integer value.
  const int s = static_cast<int>(std::floor(static_cast<double>(v - 1) * q + 1e-9));
  return std::clamp(s, 0, v - 1);
}

std::vector<double> score_distribution(double q, const TeacherConfig& cfg) {
  const int center = discretize_score(q, cfg.v);
  std::vector<double> probs(static_cast<std::size_t>(cfg.v), 0.0);
  if (cfg.score_temp == 0.0) {
    probs[static_cast<std::size_t>(center)] = 1.0;
    return probs;
  }
  double z = 0.0;
  for (int s = 0; s < cfg.v; ++s) {
    const double w = std::exp(-std::abs(s - center) / cfg.score_temp);
    probs[static_cast<std::size_t>(s)] = w;
    z += w;
  }
  for (double& p : probs) p /= z;
  return probs;
}

int sample_score(std::span<const double> dist, Rng& rng) {
  return static_cast<int>(rng.categorical(dist));
}

std::vector<int> step_scores(const Trajectory& trajectory, const Problem& problem,
                             const TeacherConfig& cfg, Rng& rng) {
  std::vector<int> scores;
  for (double q : prefix_qualities(trajectory, problem)) {
    scores.push_back(sample_score(score_distribution(q, cfg), rng));
  }
  return scores;
}

int acceptance_score(const Trajectory& trajectory, const Problem& problem,
                     const TeacherConfig& cfg, bool sampled, Rng& rng) {
  if (cfg.scoring_level == ScoringLevel::trajectory) {
    const double q = quality(trajectory, problem);
    return sampled ? sample_score(score_distribution(q, cfg), rng) : discretize_score(q, cfg.v);
  }
  auto qs = prefix_qualities(trajectory, problem);
  // An unfinished trajectory is scored like the trajectory-level cap.
  if (trajectory.truncated || !trajectory.complete()) qs.push_back(quality(trajectory, problem));
  if (qs.empty()) return 0;
  int worst = cfg.v - 1;
  for (double q : qs) {
    const int s =
        sampled ? sample_score(score_distribution(q, cfg), rng) : discretize_score(q, cfg.v);
    worst = std::min(worst, s);
  }
  return worst;
}

Trajectory teacher_rollout(const Problem& problem, const Environment& env,
                           const TeacherConfig& cfg, Rng& rng) {
  Trajectory t;
  t.problem_id = problem.id;
  t.source = Source::teacher;
  const auto& actions = env.actions();
  for (std::size_t i = 0; i < problem.oracle_steps.size(); ++i) {
    Step step = problem.oracle_steps[i];
    // Both draws are always consumed so that stream positions do not depend
    // on the outcome.
    const double u = rng.uniform();
    const auto pick = rng.next();
    if (u < cfg.error_rate) {
      const auto original = actions.action_of(step);
      auto pool = actions.actions_like(step);
      std::erase_if(pool, [&](int a) { return original && a == *original; });
      if (!pool.empty()) step = actions.to_step(pool[pick % pool.size()], problem, i);
    }
    const bool is_query = step.kind == StepKind::query;
    t.steps.push_back(std::move(step));
    if (is_query) t.steps.push_back(env_lookup(env.corpus(), t.steps.back()));
  }
  t.truncated = false;
  t.answer = extract_answer(problem, t.steps);
  return t;
}

double teacher_trajectory_prob(const Trajectory& trajectory, const Problem& problem,
                               const Environment& env, const TeacherConfig& cfg) {
  const auto steps = policy_steps(trajectory);
  if (steps.size() != problem.oracle_steps.size()) return 0.0;
  const auto& actions = env.actions();
  double p = 1.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Step& oracle = problem.oracle_steps[i];
    const auto alternatives = actions.actions_like(oracle).size() - 1;
    if (steps[i] == oracle) {
      p *= alternatives == 0 ? 1.0 : 1.0 - cfg.error_rate;
      continue;
    }
    const auto a = actions.action_of(steps[i]);
    if (!a || alternatives == 0 || actions.to_step(*a, problem, i) != steps[i]) return 0.0;
    const auto like = actions.actions_like(oracle);
    if (std::find(like.begin(), like.end(), *a) == like.end()) return 0.0;
    p *= cfg.error_rate / static_cast<double>(alternatives);
  }
  return p;
}

}  // namespace ovd
