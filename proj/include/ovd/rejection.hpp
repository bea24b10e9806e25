#pragma once

// Verbal rejection sampling: training groups with teacher replacement and the
// test-time filter.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "ovd/policy.hpp"
#include "ovd/tasks.hpp"
#include "ovd/teacher.hpp"

namespace ovd {

enum class TestMode { deterministic, sampled };

std::string_view to_string(TestMode mode);
TestMode parse_test_mode(std::string_view text);  // "det"/"deterministic" or "sampled"/"score_sampled"

struct RejectionConfig {
  int theta_train = 7;
  int theta_test = 5;
  bool reject_on_incorrect = true;
  TestMode test_mode = TestMode::deterministic;
  int max_test_retries = 1;  // student attempts before the teacher takes over
  double qa_f1_floor = 0.3;  // qa rewards below this count as incorrect

  // Thresholds must lie in [0, v].
  void validate(int v) const;
};

// a(y) = 1[score >= theta]. theta = 0 accepts everything; theta = v rejects
// everything since scores never exceed v - 1.
bool accept(int score, int theta);

// Correctness rule used by reject_on_incorrect.
bool is_correct(double reward, TaskKind kind, double qa_f1_floor);

struct GroupMember {
  Trajectory trajectory;     // final member after replacement
  int score = 0;             // acceptance score; discretize(Q) for teacher members
  double reward = 0.0;       // reward of `trajectory`
  bool accepted = false;     // student sample kept
  Source source = Source::student;
  int student_score = 0;     // score of the original student sample
  double student_reward = 0.0;
};

struct GroupBatch {
  std::string problem_id;
  std::vector<GroupMember> members;
  double alpha_contrib = 0.0;  // accepted student members / N

  std::size_t size() const { return members.size(); }
};

// Identifies the random substreams of one group. Streams are independent of
// theta, so runs that differ only in thresholds share their samples.
struct GroupKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t slot = 0;
};

// Substream purposes within a group member.
enum class StreamPurpose : std::uint64_t { student = 1, score = 2, teacher = 3, step_score = 4 };

Rng member_stream(const GroupKey& key, std::size_t member, StreamPurpose purpose);

GroupMember build_member(const Problem& problem, const Environment& env,
                         const PolicyParams& policy, const TeacherConfig& teacher,
                         const RejectionConfig& rejection, int max_steps, const GroupKey& key,
                         std::size_t member);

// Samples `n` student trajectories and replaces every rejected one with a
// single teacher rollout. Members are independent given `key`.
GroupBatch build_training_group(const Problem& problem, const Environment& env,
                                const PolicyParams& policy, const TeacherConfig& teacher,
                                const RejectionConfig& rejection, int n, int max_steps,
                                const GroupKey& key);

// Mean alpha_contrib over the window. Throws ContractViolation when empty.
double acceptance_rate(std::span<const GroupBatch> window);
double acceptance_rate(std::span<const double> alpha_contribs);

struct FilterResult {
  Trajectory trajectory;
  bool intervened = false;  // trajectory comes from the teacher
  int attempts = 0;         // student samples drawn
  int last_score = 0;       // score of the final student attempt
};

// Test-time filter. Each student attempt is scored deterministically or by a
// draw from the score distribution; the first attempt scoring >= theta_test
// is returned. After max_test_retries rejections one full teacher rollout is
// returned. theta_test = 0 returns the first student sample untouched.
FilterResult test_time_filter(const Problem& problem, const Environment& env,
                              const PolicyParams& policy, const TeacherConfig& teacher,
                              const RejectionConfig& rejection, int max_steps,
                              const GroupKey& key);

}  // namespace ovd
