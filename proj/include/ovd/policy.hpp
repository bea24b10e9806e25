#pragma once

// Student policy: a contextual softmax over the action vocabulary. The
// context is the last `context_order` tokens of the visible stream, padded on
// the left. Rows are materialized lazily; an unseen context is uniform.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ovd/rng.hpp"
#include "ovd/tasks.hpp"

namespace ovd {

inline constexpr std::string_view kPadToken = "<pad>";

using LogitRow = std::vector<double>;

struct PolicyParams {
  int context_order = 3;
  int vocab_size = 0;
  std::map<std::string, LogitRow> logits;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// Same index space as PolicyParams::logits; absent rows are zero.
using GradTable = std::map<std::string, LogitRow>;

// One decision of the policy inside a trajectory.
struct Decision {
  std::string context;
  int action = 0;
};

PolicyParams make_policy(int vocab_size, int context_order = 3);

std::string context_key(const Problem& problem, std::span<const Step> history, int order);

// Logit row for `context`, or nullptr when it has never been materialized.
const LogitRow* find_row(const PolicyParams& params, std::string_view context);
LogitRow& row_for_update(PolicyParams& params, const std::string& context);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> action_distribution(const PolicyParams& params, std::string_view context);

// Contexts and actions of every policy step in `trajectory`. Throws
// ContractViolation when a step is not in the action vocabulary.
std::vector<Decision> decisions(const PolicyParams& params, const Environment& env,
                                const Problem& problem, const Trajectory& trajectory);

Trajectory sample_trajectory(const PolicyParams& params, const Environment& env,
                             const Problem& problem, Rng& rng, int max_steps);

double log_prob(const PolicyParams& params, std::span<const Decision> path);
double log_prob(const PolicyParams& params, const Environment& env, const Problem& problem,
                const Trajectory& trajectory);

// Gradient of log pi(y) with respect to the logits: for every visited
// (context, action), onehot(action) - softmax(row), summed over steps.
GradTable grad_log_prob(const PolicyParams& params, std::span<const Decision> path);
GradTable grad_log_prob(const PolicyParams& params, const Environment& env,
                        const Problem& problem, const Trajectory& trajectory);

// acc += scale * g
void accumulate(GradTable& acc, const GradTable& g, double scale);

// Checkpoint format:
//   ovd-policy 1
//   context_order <n>
//   vocab_size <V>
//   rows <R>
//   <context>\t<token id>\t<logit>      (R * V lines, contexts sorted)
void write_checkpoint(std::ostream& out, const PolicyParams& params);
PolicyParams read_checkpoint(std::istream& in, const std::string& source_name);
void save_checkpoint(const std::string& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace ovd
