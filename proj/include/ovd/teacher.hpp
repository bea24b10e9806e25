#pragma once

// Scripted teacher: quality oracle, verbal scores, score sampling and
// demonstration rollouts.

#include <string_view>
#include <vector>

#include "ovd/rng.hpp"
#include "ovd/tasks.hpp"

namespace ovd {

enum class ScoringLevel { trajectory, step };

std::string_view to_string(ScoringLevel level);
ScoringLevel parse_scoring_level(std::string_view text);

struct TeacherConfig {
  int v = 10;                // score vocabulary {0, ..., v-1}
  double score_temp = 0.5;   // 0 gives a point mass at discretize_score(Q, v)
  double error_rate = 0.0;   // per-step corruption probability of demonstrations
  ScoringLevel scoring_level = ScoringLevel::trajectory;
  int score_offset = 0;      // added to scores when they are displayed; never to thresholds

  void validate() const;
};

// Longest matching prefix of policy steps against oracle_steps, divided by the
// oracle length. Truncated trajectories are capped at (n - 1) / n.
double quality(const Trajectory& trajectory, const Problem& problem);

// Q_k for every prefix of k = 1..K policy steps: matched steps within the
// first k positions of the correct prefix, divided by k.
std::vector<double> prefix_qualities(const Trajectory& trajectory, const Problem& problem);

// floor((v - 1) * Q). Throws ContractViolation for Q outside [0, 1] or v < 2.
int discretize_score(double q, int v);

// probs[s] proportional to exp(-|s - discretize_score(Q, v)| / score_temp).
std::vector<double> score_distribution(double q, const TeacherConfig& cfg);

int sample_score(std::span<const double> dist, Rng& rng);

// Score on which acceptance is decided. Trajectory level scores Q(y) once;
// step level scores every prefix and keeps the minimum. `sampled` draws from
// the score distribution, otherwise the deterministic discretized score is
// used.
int acceptance_score(const Trajectory& trajectory, const Problem& problem,
                     const TeacherConfig& cfg, bool sampled, Rng& rng);

// Sampled step-level scores s_k for every prefix, each in [0, v-1].
std::vector<int> step_scores(const Trajectory& trajectory, const Problem& problem,
                             const TeacherConfig& cfg, Rng& rng);

// Oracle demonstration where each policy step is replaced, with probability
// cfg.error_rate, by a uniformly chosen other action of the same kind. Steps
// whose kind has a single action cannot be corrupted.
Trajectory teacher_rollout(const Problem& problem, const Environment& env,
                           const TeacherConfig& cfg, Rng& rng);

// Exact probability that teacher_rollout emits `trajectory`.
double teacher_trajectory_prob(const Trajectory& trajectory, const Problem& problem,
                               const Environment& env, const TeacherConfig& cfg);

}  // namespace ovd
