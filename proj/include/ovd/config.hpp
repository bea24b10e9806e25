#pragma once

// Run configuration: a flat text file of `section.key = value` lines. Blank
// lines and lines starting with '#' are ignored. Every key has a default and
// unknown keys are errors.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ovd/memlab.hpp"
#include "ovd/problem_io.hpp"
#include "ovd/trainer.hpp"

namespace ovd {

struct EvalConfig {
  std::vector<int> thetas{0, 5, 10};
  std::vector<TestMode> modes{TestMode::deterministic};
  std::uint64_t seed = 0;
  int pool_size = 50;            // problems in the evaluation suite
  std::uint64_t pool_seed = 100000;
};

struct RunConfig {
  SuiteConfig task;
  TrainConfig train;  // embeds teacher and rejection settings
  EvalConfig eval;
  MemorySpec memory;
  std::string out_dir;  // empty: OVD_OUT_DIR, then the working directory

  void validate() const;
};

// Every key in documentation order.
std::vector<std::string> config_keys();

// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

// Applies a config stream on top of `cfg`. Malformed lines raise ParseError;
// unknown keys and bad values raise ConfigError naming the line.
void apply_config(RunConfig& cfg, std::istream& in, const std::string& source_name);

// Throws ConfigError naming the path when the file cannot be opened.
void apply_config_file(RunConfig& cfg, const std::string& path);

// `key = value` for every key, in config_keys() order.
void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace ovd
