#pragma once

// Synthetic problems and the scripted search environment.
//
// Two task families are provided:
//   math  running sum modulo `modulus`. The prompt lists the addends a_1..a_n,
//         the k-th correct step is (a_1 + ... + a_k) mod modulus, and the last
//         step is the answer step. The answer of a trajectory is the list of
//         all emitted values, so it is correct exactly when every step is.
//   qa    one- or two-hop lookups over a (subject, relation, object) corpus.
//         A trajectory interleaves query steps, environment documents and
//         reason steps, and ends with an answer naming an entity.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ovd {

enum class TaskKind { math, qa };
enum class StepKind { reason, query, doc, answer };
enum class Source { student, teacher };

std::string_view to_string(TaskKind kind);
std::string_view to_string(StepKind kind);
std::string_view to_string(Source source);
TaskKind parse_task_kind(std::string_view text);
StepKind parse_step_kind(std::string_view text);

// Doc payload for a query whose key is not in the corpus.
inline constexpr std::string_view kNoResult = "<no_result>";

// A query payload is "subject|relation".
inline constexpr char kKeySeparator = '|';

struct Step {
  StepKind kind = StepKind::reason;
  std::string token;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Problem {
  std::string id;
  TaskKind kind = TaskKind::math;
  std::vector<std::string> prompt;
  std::vector<std::string> gold_answer;
  std::vector<Step> oracle_steps;  // policy steps only; docs are inserted by the environment
  std::uint64_t seed = 0;
  int modulus = 0;  // math only

  friend bool operator==(const Problem&, const Problem&) = default;
};

struct Trajectory {
  std::string problem_id;
  std::vector<Step> steps;
  std::vector<std::string> answer;
  bool truncated = false;
  Source source = Source::student;

  // Number of policy-generated (non-doc) steps.
  std::size_t policy_step_count() const;
  bool complete() const { return !steps.empty() && steps.back().kind == StepKind::answer; }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Triple> records);

  // Throws ContractViolation if (subject, relation) is already present.
  void add(Triple record);

  std::optional<std::string_view> lookup(std::string_view subject,
                                         std::string_view relation) const;
  const std::vector<Triple>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Every subject and object, sorted and unique.
  std::vector<std::string> entities() const;

 private:
  std::vector<Triple> records_;
  std::map<std::pair<std::string, std::string>, std::size_t, std::less<>> index_;
};

// Parses `subject<TAB>relation<TAB>object` lines. Blank lines are skipped.
Corpus parse_corpus(std::istream& in, const std::string& source_name);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);

// Random corpus of chained facts, used when no corpus file is supplied.
Corpus synthetic_corpus(std::uint64_t seed, int entities, int relations);

std::string make_query_token(std::string_view subject, std::string_view relation);

// Maps policy action ids to steps for one task family.
class ActionSpace {
 public:
  static ActionSpace math(int modulus);
  static ActionSpace qa(const Corpus& corpus);

  TaskKind kind() const { return kind_; }
  int size() const;

  // Step produced when `action` is chosen as the `index`-th policy step.
  Step to_step(int action, const Problem& problem, std::size_t index) const;
  std::optional<int> action_of(const Step& step) const;

  // Actions whose steps share `kind`; for math every action is a value.
  std::vector<int> actions_like(const Step& step) const;

 private:
  TaskKind kind_ = TaskKind::math;
  int modulus_ = 0;
  std::vector<Step> qa_actions_;
  std::map<std::pair<StepKind, std::string>, int> qa_index_;
};

// Task family plus the environment that answers queries.
class Environment {
 public:
  static Environment math(int modulus);
  static Environment qa(Corpus corpus);

  TaskKind kind() const { return actions_.kind(); }
  const ActionSpace& actions() const { return actions_; }
  const Corpus& corpus() const { return corpus_; }

 private:
  Environment(ActionSpace actions, Corpus corpus)
      : actions_(std::move(actions)), corpus_(std::move(corpus)) {}

  ActionSpace actions_;
  Corpus corpus_;
};

Problem generate_math_problem(std::uint64_t seed, int chain_len, int vocab_size);
Problem generate_qa_problem(std::uint64_t seed, const Corpus& corpus, int hops);

// Resolves a query step to a doc step; absent keys yield kNoResult.
Step env_lookup(const Corpus& corpus, const Step& query);

// True once `steps` can no longer be extended (an answer step was emitted).
bool is_terminal(std::span<const Step> steps);

// Answer tokens carried by a finished trajectory; empty when it has no answer.
std::vector<std::string> extract_answer(const Problem& problem, std::span<const Step> steps);

// Policy-visible token stream before the next policy step. Math interleaves
// the addends with the emitted values (the next addend is revealed before
// each step); qa is the prompt followed by the step history.
std::vector<std::string> visible_stream(const Problem& problem, std::span<const Step> history);

// Splits on whitespace; case is preserved.
std::vector<std::string> split_words(std::string_view text);

}  // namespace ovd
