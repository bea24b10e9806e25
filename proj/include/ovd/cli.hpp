#pragma once

// Command-line front end and the evaluation grid.
//
// Exit codes:
//   0  success
//   1  internal error
//   2  usage error (unknown flag, bad arguments)
//   3  configuration error (missing or malformed config, invalid value)
//   4  a theory check failed
//   5  I/O error
//   6  numerical failure during training

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ovd/config.hpp"
#include "ovd/policy.hpp"
#include "ovd/problem_io.hpp"
#include "ovd/rejection.hpp"
#include "ovd/teacher.hpp"

namespace ovd {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitConfig = 3,
  kExitCheckFailed = 4,
  kExitIo = 5,
  kExitNumeric = 6,
};

inline constexpr std::string_view kEvalHeader =
    "theta_test,mode,mean_reward,exact_match_rate,intervention_fraction";
inline constexpr std::string_view kEvalOutcomeHeader =
    "theta_test,mode,problem_id,reward,exact_match,intervened,attempts";

struct EvalOutcome {
  int theta = 0;
  TestMode mode = TestMode::deterministic;
  std::string problem_id;
  double reward = 0.0;
  double exact_match = 0.0;
  bool intervened = false;
  int attempts = 0;
};

struct EvalRow {
  int theta = 0;
  TestMode mode = TestMode::deterministic;
  double mean_reward = 0.0;
  double exact_match_rate = 0.0;
  double intervention_fraction = 0.0;
};

struct EvalTable {
  std::vector<EvalRow> rows;
  std::vector<EvalOutcome> outcomes;
};

// One row per (theta, mode). Student samples for a problem come from the same
// substreams under every theta and mode.
EvalTable eval_grid(const PolicyParams& policy, const TaskSuite& suite,
                    const TeacherConfig& teacher, const RejectionConfig& rejection,
                    const std::vector<int>& thetas, const std::vector<TestMode>& modes,
                    std::uint64_t seed, int max_steps);

void write_eval_csv(std::ostream& out, const EvalTable& table);
void write_eval_outcomes_csv(std::ostream& out, const EvalTable& table);

// Entry point of the `ovd` binary.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ovd
