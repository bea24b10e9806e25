#pragma once

// Group-relative clipped policy-gradient training with verbal rejection
// sampling.

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ovd/policy.hpp"
#include "ovd/problem_io.hpp"
#include "ovd/rejection.hpp"
#include "ovd/teacher.hpp"

namespace ovd {

enum class CreditMode { trajectory, step };

std::string_view to_string(CreditMode mode);
CreditMode parse_credit_mode(std::string_view text);

struct TrainConfig {
  int group_size = 8;          // N
  int batch_problems = 1;      // B
  double lr = 0.5;
  double eps_clip = 0.2;
  double eps_adv = 1e-6;
  bool kl_enabled = false;
  double kl_coef = 0.001;
  CreditMode credit_mode = CreditMode::trajectory;
  int steps = 2000;
  std::uint64_t seed = 0;
  int updates_per_batch = 1;   // passes over each batch; passes after the first see rho != 1
  int max_rollout_steps = 16;
  int alpha_window = 10;       // groups in the acceptance-rate window
  int threads = 1;
  int context_order = 2;
  TeacherConfig teacher;
  RejectionConfig rejection;

  void validate() const;
};

struct TrainMetrics {
  int step = 0;
  double mean_reward = 0.0;     // student rewards before replacement
  double alpha = 0.0;           // windowed acceptance rate
  double clip_fraction = 0.0;
  double mean_advantage = 0.0;
  double loss = 0.0;
  double kl = 0.0;              // 0 when the KL term is disabled
};

inline constexpr std::string_view kMetricsHeader =
    "step,mean_reward,alpha,clip_fraction,mean_advantage,loss,kl";

void write_metrics_row(std::ostream& out, const TrainMetrics& m);

// A_j = (R_j - mean) / (population std + eps). Requires at least 2 rewards.
std::vector<double> group_advantages(std::span<const double> rewards, double eps_adv);

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A).
double clipped_objective(double rho, double advantage, double eps_clip);

// True when the clipped branch is strictly smaller, so the term has no
// gradient.
bool is_clipped(double rho, double advantage, double eps_clip);

// Trajectory mode broadcasts R(y) to every policy step. Step mode draws a
// score for each prefix and divides by v - 1.
std::vector<double> step_rewards(const Trajectory& trajectory, const Problem& problem,
                                 double trajectory_reward, const TeacherConfig& teacher,
                                 CreditMode mode, Rng& rng);

// Sliding window of per-group alpha contributions.
class AlphaTracker {
 public:
  explicit AlphaTracker(int window) : window_(window) {}
  void push(double alpha_contrib);
  double value() const;

 private:
  int window_;
  std::deque<double> recent_;
};

struct StepOutput {
  TrainMetrics metrics;
  std::vector<GroupBatch> groups;
};

// One iteration: builds a group per problem, snapshots the policy, and runs
// updates_per_batch gradient-descent passes on the clipped objective.
StepOutput train_step(PolicyParams& policy, std::span<const Problem> problems,
                      const Environment& env, const TrainConfig& cfg, int step,
                      AlphaTracker& alpha);

// Problems of iteration `step`: the whole pool when it has at most
// batch_problems entries, otherwise a seeded draw with replacement.
std::vector<Problem> batch_for_step(const TaskSuite& suite, const TrainConfig& cfg, int step);

using MetricsSink = std::function<void(const TrainMetrics&)>;

// Runs cfg.steps iterations from `initial` and returns the final policy.
PolicyParams train(const TrainConfig& cfg, const TaskSuite& suite, PolicyParams initial,
                   const MetricsSink& sink);

}  // namespace ovd
