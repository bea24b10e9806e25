#pragma once

// Exact and Monte Carlo oracles over exhaustively enumerated trajectory
// spaces. Scores are point masses, so S(y) is a fixed function of y.

#include <cstdint>
#include <string>
#include <vector>

#include "ovd/policy.hpp"
#include "ovd/rng.hpp"
#include "ovd/tasks.hpp"
#include "ovd/teacher.hpp"

namespace ovd {

inline constexpr std::size_t kMaxEnumeratedTrajectories = 100'000;

// Flattened parameter coordinate: one logit cell.
struct ParamCell {
  std::string context;
  int action = 0;

  friend bool operator==(const ParamCell&, const ParamCell&) = default;
};

struct EnumeratedSpace {
  int v = 10;
  std::vector<Trajectory> trajectories;
  std::vector<double> probs;          // pi_S(y)
  std::vector<double> teacher_probs;  // pi_T(y)
  std::vector<int> scores;            // discretize_score(Q(y), v)
  std::vector<double> rewards;        // R(y)
  std::vector<ParamCell> params;
  std::vector<std::vector<double>> grads;  // grad log pi_S(y) over `params`

  std::size_t size() const { return trajectories.size(); }
};

// Depth-first expansion of every trajectory reachable within max_len policy
// steps. Throws ContractViolation when vocab^max_len exceeds the enumeration
// bound or when some branch is still unfinished at max_len.
EnumeratedSpace enumerate_trajectories(const PolicyParams& policy, const Environment& env,
                                       const Problem& problem, const TeacherConfig& teacher,
                                       int max_len);

// Keeps only the listed parameter coordinates (by position in space.params).
EnumeratedSpace select_params(const EnumeratedSpace& space, const std::vector<std::size_t>& keep);

struct Mixture {
  std::vector<double> p_train;
  double alpha = 0.0;
};

// p_train(y) = pi_S(y) 1[S(y) >= theta] + (1 - alpha) pi_T(y).
Mixture exact_mixture(const EnumeratedSpace& space, int theta);

struct ExactGradient {
  std::vector<double> term1;  // sum_y pi_S(y) 1[S >= theta] R(y) grad log pi_S(y)
  std::vector<double> term2;  // (1 - alpha) sum_y pi_T(y) R(y) grad log pi_S(y)
  std::vector<double> total;
  double alpha = 0.0;
};

ExactGradient exact_gradient(const EnumeratedSpace& space, int theta);

struct McEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;  // per entry, sample standard deviation / sqrt(samples)
  std::uint64_t samples = 0;
};

// Rejection-sampling estimator: draw y ~ pi_S; if accepted contribute
// R(y) grad log pi_S(y), otherwise draw y' ~ pi_T and contribute
// R(y') grad log pi_S(y').
McEstimate mc_gradient(const EnumeratedSpace& space, int theta, std::uint64_t samples, Rng& rng);

// Plain on-policy estimator R(y) grad log pi_S(y), y ~ pi_S.
McEstimate mc_plain_gradient(const EnumeratedSpace& space, std::uint64_t samples, Rng& rng);

struct VarianceReport {
  // Total variance: trace of the covariance of the per-sample estimate.
  double exact_v0 = 0.0;
  double exact_vrs = 0.0;
  double empirical_v0 = 0.0;
  double empirical_vrs = 0.0;
  double se_v0 = 0.0;   // standard error of empirical_v0
  double se_vrs = 0.0;  // standard error of empirical_vrs
  // E_{pi_S}[1[S < theta] ||R grad log pi_S||^2]; the claimed upper bound on
  // V[gRS] is exact_v0 - bound_term.
  double bound_term = 0.0;
};

VarianceReport estimator_variances(const EnumeratedSpace& space, int theta,
                                   std::uint64_t samples, Rng& rng);

struct ConvergenceReport {
  double alpha = 0.0;
  double delta = 0.0;  // (J_T - E[R | accepted]) / J_T; 0 when nothing is accepted
  double j_teacher = 0.0;
  double lhs = 0.0;    // E_{p_train}[R]
  double rhs = 0.0;    // (1 - alpha delta) J_T
  bool passed = false; // |lhs - rhs| <= 1e-12
};

// Throws ContractViolation when J(pi_T) = 0, where delta is undefined.
ConvergenceReport convergence_check(const EnumeratedSpace& space, int theta);

struct GranularityReport {
  int v = 0;
  double mean_error = 0.0;  // mean |Q - S_v / (v - 1)| for Q uniform on [0, 1]
  double target = 0.0;      // 1 / (2 (v - 1))
  double max_error = 0.0;   // largest pointwise error seen; never above 1 / (v - 1)
};

GranularityReport granularity_check(int v, std::uint64_t samples, Rng& rng);

// Random enumerable math space: vocab 2-3, chain 1-2, random student logits,
// and a teacher error rate of 0 when `deterministic_teacher`, otherwise drawn
// from [0, 0.5].
EnumeratedSpace random_space(std::uint64_t seed, bool deterministic_teacher);

// Two trajectories: the oracle "a" with pi_S = 0.6, S = 9, R = 1 and "b" with
// pi_S = 0.4, S = 0, R = 0, a teacher that always plays "a", and gradients
// restricted to the logit z_a.
EnumeratedSpace toy_space();

}  // namespace ovd
