#include "ovd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "ovd/error.hpp"

namespace ovd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integral(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, text));
  }
  return value;
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{}: expected a finite number, got '{}'", key, text));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) return parts;
    start = comma + 1;
  }
}

std::string real(double x) { return fmt::format("{}", x); }
std::string boolean(bool b) { return b ? "true" : "false"; }

struct Entry {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define OVD_INT(KEY, FIELD)                                                              \
  Entry {                                                                                \
    KEY, [](RunConfig& c, std::string_view v) { c.FIELD = parse_integral<int>(KEY, v); }, \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                        \
  }
#define OVD_U64(KEY, FIELD)                                                           \
  Entry {                                                                             \
    KEY,                                                                              \
        [](RunConfig& c, std::string_view v) {                                        \
          c.FIELD = parse_integral<std::uint64_t>(KEY, v);                            \
        },                                                                            \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                     \
  }
#define OVD_REAL(KEY, FIELD)                                                         \
  Entry {                                                                            \
    KEY, [](RunConfig& c, std::string_view v) { c.FIELD = parse_real(KEY, v); },     \
        [](const RunConfig& c) { return real(c.FIELD); }                              \
  }
#define OVD_BOOL(KEY, FIELD)                                                         \
  Entry {                                                                            \
    KEY, [](RunConfig& c, std::string_view v) { c.FIELD = parse_bool(KEY, v); },     \
        [](const RunConfig& c) { return boolean(c.FIELD); }                           \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"task.kind", [](RunConfig& c, std::string_view v) { c.task.kind = parse_task_kind(v); },
       [](const RunConfig& c) { return std::string(to_string(c.task.kind)); }},
      OVD_INT("task.chain_len", task.chain_len),
      OVD_INT("task.vocab_size", task.vocab_size),
      OVD_INT("task.hops", task.hops),
      OVD_INT("task.pool_size", task.pool_size),
      OVD_U64("task.pool_seed", task.pool_seed),
      {"task.corpus_path",
       [](RunConfig& c, std::string_view v) { c.task.corpus_path = std::string(v); },
       [](const RunConfig& c) { return c.task.corpus_path; }},
      OVD_INT("task.corpus_entities", task.corpus_entities),
      OVD_INT("task.corpus_relations", task.corpus_relations),
      OVD_U64("task.corpus_seed", task.corpus_seed),

      OVD_INT("train.group_size", train.group_size),
      OVD_INT("train.batch_problems", train.batch_problems),
      OVD_REAL("train.lr", train.lr),
      OVD_REAL("train.eps_clip", train.eps_clip),
      OVD_REAL("train.eps_adv", train.eps_adv),
      OVD_BOOL("train.kl_enabled", train.kl_enabled),
      OVD_REAL("train.kl_coef", train.kl_coef),
      {"train.credit_mode",
       [](RunConfig& c, std::string_view v) { c.train.credit_mode = parse_credit_mode(v); },
       [](const RunConfig& c) { return std::string(to_string(c.train.credit_mode)); }},
      OVD_INT("train.steps", train.steps),
      OVD_U64("train.seed", train.seed),
      OVD_INT("train.updates_per_batch", train.updates_per_batch),
      OVD_INT("train.max_rollout_steps", train.max_rollout_steps),
      OVD_INT("train.alpha_window", train.alpha_window),
      OVD_INT("train.threads", train.threads),
      OVD_INT("train.context_order", train.context_order),

      OVD_INT("teacher.v", train.teacher.v),
      OVD_REAL("teacher.score_temp", train.teacher.score_temp),
      OVD_REAL("teacher.error_rate", train.teacher.error_rate),
      {"teacher.scoring_level",
       [](RunConfig& c, std::string_view v) {
         c.train.teacher.scoring_level = parse_scoring_level(v);
       },
       [](const RunConfig& c) { return std::string(to_string(c.train.teacher.scoring_level)); }},
      OVD_INT("teacher.score_offset", train.teacher.score_offset),

      OVD_INT("rejection.theta_train", train.rejection.theta_train),
      OVD_INT("rejection.theta_test", train.rejection.theta_test),
      OVD_BOOL("rejection.reject_on_incorrect", train.rejection.reject_on_incorrect),
      {"rejection.test_mode",
       [](RunConfig& c, std::string_view v) { c.train.rejection.test_mode = parse_test_mode(v); },
       [](const RunConfig& c) { return std::string(to_string(c.train.rejection.test_mode)); }},
      OVD_INT("rejection.max_test_retries", train.rejection.max_test_retries),
      OVD_REAL("rejection.qa_f1_floor", train.rejection.qa_f1_floor),

      {"eval.thetas",
       [](RunConfig& c, std::string_view v) {
         c.eval.thetas.clear();
         for (auto part : split_commas(v)) c.eval.thetas.push_back(parse_integral<int>("eval.thetas", part));
       },
       [](const RunConfig& c) { return fmt::format("{}", fmt::join(c.eval.thetas, ",")); }},
      {"eval.modes",
       [](RunConfig& c, std::string_view v) {
         c.eval.modes.clear();
         for (auto part : split_commas(v)) c.eval.modes.push_back(parse_test_mode(part));
       },
       [](const RunConfig& c) {
         std::vector<std::string_view> names;
         for (auto m : c.eval.modes) names.push_back(to_string(m));
         return fmt::format("{}", fmt::join(names, ","));
       }},
      OVD_U64("eval.seed", eval.seed),
      OVD_INT("eval.pool_size", eval.pool_size),
      OVD_U64("eval.pool_seed", eval.pool_seed),

      OVD_U64("memory.B", memory.B),
      OVD_U64("memory.N", memory.N),
      OVD_U64("memory.L", memory.L),
      OVD_U64("memory.V", memory.V),
      OVD_U64("memory.v", memory.v),
      OVD_U64("memory.K", memory.K),
      OVD_U64("memory.n_layers", memory.n_layers),
      OVD_U64("memory.H_kv", memory.H_kv),
      OVD_U64("memory.d", memory.d),
      OVD_U64("memory.d32", memory.d32),
      OVD_U64("memory.d16", memory.d16),

      {"run.out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
       [](const RunConfig& c) { return c.out_dir; }},
  };
  return table;
}

#undef OVD_INT
#undef OVD_U64
#undef OVD_REAL
#undef OVD_BOOL

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key == key) return e;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

void RunConfig::validate() const {
  task.validate();
  train.validate();
  memory.validate();
  if (eval.thetas.empty()) throw ConfigError("eval.thetas must not be empty");
  for (int t : eval.thetas) {
    if (t < 0 || t > train.teacher.v) {
      throw ConfigError(fmt::format("eval.thetas entry {} outside [0, {}]", t, train.teacher.v));
    }
  }
  if (eval.modes.empty()) throw ConfigError("eval.modes must not be empty");
  if (eval.pool_size < 1) throw ConfigError("eval.pool_size must be >= 1");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_entry(key).set(cfg, trim(value));
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

void apply_config(RunConfig& cfg, std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source_name, line_no, "expected 'section.key = value'");
    }
    const auto key = trim(body.substr(0, eq));
    try {
      set_config_value(cfg, key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  apply_config(cfg, in, path);
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& e : entries()) out << e.key << " = " << e.get(cfg) << '\n';
}

}  // namespace ovd
