#pragma once

// Task suites (environment plus a fixed problem pool) and problem-set files.
//
// A problem-set file is JSON:
//   {"schema": "ovd-problems/1", "kind": "math"|"qa",
//    "corpus": [[subject, relation, object], ...],        (qa only)
//    "problems": {"<id>": {"kind", "prompt", "gold_answer",
//                          "oracle_steps": [["reason", "3"], ...],
//                          "seed", "modulus"}}}
// Problems are keyed by id, so files list them in id order.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ovd/tasks.hpp"

namespace ovd {

inline constexpr std::string_view kProblemSchema = "ovd-problems/1";

struct SuiteConfig {
  TaskKind kind = TaskKind::math;
  int chain_len = 5;     // math
  int vocab_size = 10;   // math
  int hops = 2;          // qa
  int pool_size = 1;     // problems generated with seeds pool_seed, pool_seed + 1, ...
  std::uint64_t pool_seed = 0;
  std::string corpus_path;  // qa; empty selects a synthetic corpus
  int corpus_entities = 6;
  int corpus_relations = 2;
  std::uint64_t corpus_seed = 0;

  void validate() const;
};

struct TaskSuite {
  Environment env;
  std::vector<Problem> problems;
};

TaskSuite build_suite(const SuiteConfig& cfg);

void write_problem_set(std::ostream& out, const TaskSuite& suite);
TaskSuite read_problem_set(std::istream& in, const std::string& source_name);
void save_problem_set(const std::string& path, const TaskSuite& suite);
TaskSuite load_problem_set(const std::string& path);

}  // namespace ovd
