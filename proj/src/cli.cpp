#include "ovd/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ovd/error.hpp"
#include "ovd/memlab.hpp"
#include "ovd/rewards.hpp"
#include "ovd/theorylab.hpp"
#include "ovd/trainer.hpp"

namespace ovd {

// ---------------------------------------------------------------------------
// Evaluation grid

EvalTable eval_grid(const PolicyParams& policy, const TaskSuite& suite,
                    const TeacherConfig& teacher, const RejectionConfig& rejection,
                    const std::vector<int>& thetas, const std::vector<TestMode>& modes,
                    std::uint64_t seed, int max_steps) {
  if (suite.problems.empty()) throw ConfigError("evaluation suite has no problems");
  if (policy.vocab_size != suite.env.actions().size()) {
    throw ConfigError(fmt::format("checkpoint vocabulary {} does not match task vocabulary {}",
                                  policy.vocab_size, suite.env.actions().size()));
  }
  EvalTable table;
  for (int theta : thetas) {
    for (TestMode mode : modes) {
      RejectionConfig rc = rejection;
      rc.theta_test = theta;
      rc.test_mode = mode;
      rc.validate(teacher.v);
      EvalRow row{theta, mode, 0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < suite.problems.size(); ++i) {
        const auto& problem = suite.problems[i];
        const GroupKey key{seed, static_cast<std::uint64_t>(i), 0};
        const auto r = test_time_filter(problem, suite.env, policy, teacher, rc, max_steps, key);
        EvalOutcome o;
        o.theta = theta;
        o.mode = mode;
        o.problem_id = problem.id;
        o.reward = reward(r.trajectory, problem);
        o.exact_match = r.trajectory.truncated
                            ? 0.0
                            : exact_match_reward(r.trajectory.answer, problem.gold_answer);
        o.intervened = r.intervened;
        o.attempts = r.attempts;
        row.mean_reward += o.reward;
        row.exact_match_rate += o.exact_match;
        row.intervention_fraction += o.intervened ? 1.0 : 0.0;
        table.outcomes.push_back(std::move(o));
      }
      const double n = static_cast<double>(suite.problems.size());
      row.mean_reward /= n;
      row.exact_match_rate /= n;
      row.intervention_fraction /= n;
      table.rows.push_back(row);
    }
  }
  return table;
}

void write_eval_csv(std::ostream& out, const EvalTable& table) {
  out << kEvalHeader << '\n';
  for (const auto& r : table.rows) {
    out << fmt::format("{},{},{},{},{}\n", r.theta, to_string(r.mode), r.mean_reward,
                       r.exact_match_rate, r.intervention_fraction);
  }
}

void write_eval_outcomes_csv(std::ostream& out, const EvalTable& table) {
  out << kEvalOutcomeHeader << '\n';
  for (const auto& o : table.outcomes) {
    out << fmt::format("{},{},{},{},{},{},{}\n", o.theta, to_string(o.mode), o.problem_id,
                       o.reward, o.exact_match, o.intervened ? 1 : 0, o.attempts);
  }
}

namespace {

// ---------------------------------------------------------------------------
// Shared option handling

using Overrides = std::vector<std::pair<std::string, std::string>>;

struct ConfigOptions {
  std::string config_path;
  Overrides overrides;
  bool print_config = false;
  std::string out_dir;
};

void add_override(CLI::App* cmd, ConfigOptions& opts, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&opts, key](const std::string& v) { opts.overrides.emplace_back(key, v); }, help);
}

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run config file (section.key = value)");
  cmd->add_option_function<std::vector<std::string>>(
      "--set",
      [&opts](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos) {
            throw CLI::ValidationError("--set", "expected KEY=VALUE, got '" + item + "'");
          }
          opts.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
        }
      },
      "Override a config key, e.g. --set train.lr=0.25");
  cmd->add_flag("--print-config", opts.print_config, "Print the resolved config and exit");
}

void add_method_flags(CLI::App* cmd, ConfigOptions& opts) {
  add_override(cmd, opts, "--v", "teacher.v", "Score vocabulary size");
  add_override(cmd, opts, "--score-temp", "teacher.score_temp", "Score sampling temperature");
  add_override(cmd, opts, "--teacher-error-rate", "teacher.error_rate",
               "Per-step teacher corruption probability");
  add_override(cmd, opts, "--scoring-level", "teacher.scoring_level", "trajectory or step");
  add_override(cmd, opts, "--theta-train", "rejection.theta_train", "Training threshold");
  add_override(cmd, opts, "--theta-test", "rejection.theta_test", "Test threshold");
  add_override(cmd, opts, "--test-mode", "rejection.test_mode", "det or sampled");
  add_override(cmd, opts, "--reject-on-incorrect", "rejection.reject_on_incorrect",
               "Also replace incorrect accepted samples (true/false)");
  add_override(cmd, opts, "--seed", "train.seed", "Root seed");
}

RunConfig resolve_config(const ConfigOptions& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) apply_config_file(cfg, opts.config_path);
  for (const auto& [key, value] : opts.overrides) set_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

std::filesystem::path resolve_out_dir(const ConfigOptions& opts, const RunConfig& cfg) {
  std::string dir = opts.out_dir;
  if (dir.empty()) dir = cfg.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("OVD_OUT_DIR"); env != nullptr && *env != '\0') dir = env;
  }
  if (dir.empty()) dir = ".";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const ConfigOptions& opts, std::ostream& out) {
  const auto cfg = resolve_config(opts);
  if (opts.print_config) {
    write_config(out, cfg);
    return kExitOk;
  }
  const auto dir = resolve_out_dir(opts, cfg);
  const auto suite = build_suite(cfg.task);
  auto policy = make_policy(suite.env.actions().size(), cfg.train.context_order);

  const auto metrics_path = dir / "metrics.csv";
  auto metrics = open_output(metrics_path);
  metrics << kMetricsHeader << '\n';
  TrainMetrics last;
  policy = train(cfg.train, suite, std::move(policy), [&](const TrainMetrics& m) {
    write_metrics_row(metrics, m);
    check_written(metrics, metrics_path);
    last = m;
  });
  metrics.close();
  check_written(metrics, metrics_path);

  save_checkpoint((dir / "policy.ckpt").string(), policy);

  std::ostringstream config_text;
  write_config(config_text, cfg);
  nlohmann::ordered_json manifest;
  manifest["schema"] = "ovd-run/1";
  manifest["metrics_header"] = kMetricsHeader;
  manifest["checkpoint"] = "policy.ckpt";
  manifest["checkpoint_format"] = "ovd-policy 1";
  manifest["config"] = config_text.str();
  const auto manifest_path = dir / "manifest.json";
  auto mf = open_output(manifest_path);
  mf << manifest.dump(2) << '\n';
  check_written(mf, manifest_path);

  out << fmt::format("trained {} steps: mean_reward={} alpha={} -> {}\n", cfg.train.steps,
                     last.mean_reward, last.alpha, dir.string());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string checkpoint;
  std::string problems;
  std::string thetas;
  std::string modes;
};

int cmd_eval(ConfigOptions opts, const EvalOptions& eo, std::ostream& out) {
  if (!eo.thetas.empty()) opts.overrides.emplace_back("eval.thetas", eo.thetas);
  if (!eo.modes.empty()) opts.overrides.emplace_back("eval.modes", eo.modes);
  const auto cfg = resolve_config(opts);
  if (opts.print_config) {
    write_config(out, cfg);
    return kExitOk;
  }
  const auto policy = load_checkpoint(eo.checkpoint);
  TaskSuite suite = [&] {
    if (!eo.problems.empty()) return load_problem_set(eo.problems);
    SuiteConfig sc = cfg.task;
    sc.pool_size = cfg.eval.pool_size;
    sc.pool_seed = cfg.eval.pool_seed;
    return build_suite(sc);
  }();
  const auto table = eval_grid(policy, suite, cfg.train.teacher, cfg.train.rejection,
                               cfg.eval.thetas, cfg.eval.modes, cfg.eval.seed,
                               cfg.train.max_rollout_steps);
  const auto dir = resolve_out_dir(opts, cfg);
  const auto grid_path = dir / "eval.csv";
  auto grid = open_output(grid_path);
  write_eval_csv(grid, table);
  check_written(grid, grid_path);
  const auto outcomes_path = dir / "eval_outcomes.csv";
  auto outcomes = open_output(outcomes_path);
  write_eval_outcomes_csv(outcomes, table);
  check_written(outcomes, outcomes_path);
  write_eval_csv(out, table);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// memory

struct MemoryOptions {
  std::string units = "gb";
  std::string axis = "L";
  std::string range;
};

std::string quantity(ByteQuantity q, MemoryUnit unit) {
  switch (unit) {
    case MemoryUnit::gb: return fmt::format("{:.4f}", q.gb());
    case MemoryUnit::gib: return fmt::format("{:.4f}", q.gib());
    case MemoryUnit::bytes: return std::to_string(q.bytes);
  }
  return {};
}

int cmd_memory_table1(const ConfigOptions& opts, const MemoryOptions& mo, std::ostream& out) {
  const auto cfg = resolve_config(opts);
  const auto unit = parse_memory_unit(mo.units);
  out << "component,shape,bytes,memory\n";
  for (const auto& row : table1(cfg.memory)) {
    out << fmt::format("{},\"{}\",{},{}\n", row.component, row.shape, row.bytes.bytes,
                       format_bytes(row.bytes, unit, 2));
  }
  return kExitOk;
}

int cmd_memory_sweep(const ConfigOptions& opts, const MemoryOptions& mo, std::ostream& out) {
  const auto cfg = resolve_config(opts);
  const auto unit = parse_memory_unit(mo.units);
  const auto axis = parse_sweep_axis(mo.axis);
  const auto values = parse_sweep_range(mo.range.empty()
                                            ? (axis == SweepAxis::L ? "1024:32768" : "1:32")
                                            : mo.range);
  const auto u = mo.units;
  out << fmt::format("{},fp32_{},bf16_{},kv_{},total_{}\n", mo.axis, u, u, u, u);
  for (const auto& r : emit_curves(axis, values, cfg.memory)) {
    out << fmt::format("{},{},{},{},{}\n", r.axis_value, quantity(r.fp32, unit),
                       quantity(r.bf16, unit), quantity(r.kv, unit), quantity(r.total, unit));
  }
  return kExitOk;
}

int cmd_memory_reduction(const ConfigOptions& opts, std::ostream& out) {
  const auto cfg = resolve_config(opts);
  const auto f = verbal_bytes_and_reduction(cfg.memory);
  const auto token = token_distill_total_bytes(cfg.memory);
  out << "N,V,v,K,verbal_bytes,token_total_bytes,reduction_NV_over_v\n";
  out << fmt::format("{},{},{},{},{},{},{}\n", cfg.memory.N, cfg.memory.V, cfg.memory.v,
                     cfg.memory.K, f.bytes.bytes, token.bytes, f.reduction);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// theory

struct TheoryOptions {
  std::string check = "all";
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int spaces = 20;
  int convergence_spaces = 100;
};

struct CheckRow {
  std::string check;
  std::string label;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

void print_row(std::ostream& out, const CheckRow& r) {
  out << fmt::format("{},{},{},{},{},{}\n", r.check, r.label, r.value, r.reference, r.tolerance,
                     r.passed ? "PASS" : "FAIL");
}

// Summation roundoff on O(1) gradient entries; differences below this are 0.
constexpr double kRoundoff = 1e-12;

// Largest (|mc - exact| - roundoff) / se over entries. An entry with se = 0
// reports 0 when it agrees to within roundoff and infinity otherwise.
double max_z(const McEstimate& mc, const std::vector<double>& exact) {
  double worst = 0.0;
  for (std::size_t p = 0; p < exact.size(); ++p) {
    const double excess = std::fabs(mc.mean[p] - exact[p]) - kRoundoff;
    if (excess <= 0.0) continue;
    if (mc.std_error[p] == 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, excess / mc.std_error[p]);
  }
  return worst;
}

std::vector<CheckRow> theory_unbiased(const TheoryOptions& t) {
  std::vector<CheckRow> rows;
  for (int s = 1; s <= t.spaces; ++s) {
    const auto space = random_space(static_cast<std::uint64_t>(s), s % 2 == 0);
    for (int theta = 0; theta <= space.v; ++theta) {
      auto rng = Rng::derive(t.seed, {1, static_cast<std::uint64_t>(s),
                                      static_cast<std::uint64_t>(theta)});
      const auto mc = mc_gradient(space, theta, t.samples, rng);
      const double z = max_z(mc, exact_gradient(space, theta).total);
      rows.push_back({"unbiased", fmt::format("space{}_theta{}", s, theta), z, 0.0, 3.0, z <= 3.0});
    }
  }
  const auto toy = toy_space();
  auto rng = Rng::derive(t.seed, {1, 0});
  const auto mc = mc_gradient(toy, 5, t.samples, rng);
  const double exact = exact_gradient(toy, 5).total[0];
  const double tol = 3.0 * mc.std_error[0] + kRoundoff;
  rows.push_back({"unbiased", "toy_theta5", mc.mean[0], 0.40, tol,
                  std::fabs(mc.mean[0] - 0.40) <= tol && std::fabs(exact - 0.40) <= kRoundoff});
  return rows;
}

std::vector<CheckRow> theory_variance(const TheoryOptions& t) {
  std::vector<CheckRow> rows;
  for (int s = 1; s <= t.spaces; ++s) {
    const auto space = random_space(static_cast<std::uint64_t>(s), true);
    for (int theta = 0; theta <= space.v; ++theta) {
      auto rng = Rng::derive(t.seed, {2, static_cast<std::uint64_t>(s),
                                      static_cast<std::uint64_t>(theta)});
      const auto r = estimator_variances(space, theta, t.samples, rng);
      const double slack = 3.0 * std::hypot(r.se_v0, r.se_vrs);
      rows.push_back({"variance", fmt::format("space{}_theta{}", s, theta), r.empirical_vrs,
                      r.empirical_v0, slack, r.empirical_vrs <= r.empirical_v0 + slack});
    }
  }
  const auto toy = toy_space();
  auto rng = Rng::derive(t.seed, {2, 0});
  const auto r = estimator_variances(toy, 5, t.samples, rng);
  rows.push_back({"variance", "toy_exact_v0", r.exact_v0, 0.0384, 1e-12,
                  std::fabs(r.exact_v0 - 0.0384) <= 1e-12});
  rows.push_back({"variance", "toy_exact_vrs", r.exact_vrs, 0.0, 1e-12,
                  std::fabs(r.exact_vrs) <= 1e-12});
  return rows;
}

std::vector<CheckRow> theory_convergence(const TheoryOptions& t) {
  std::vector<CheckRow> rows;
  for (int s = 1; s <= t.convergence_spaces; ++s) {
    const auto space = random_space(static_cast<std::uint64_t>(1000 + s), s % 2 == 0);
    double worst = 0.0;
    bool identity = true;
    for (int theta = 0; theta <= space.v; ++theta) {
      const auto c = convergence_check(space, theta);
      worst = std::max(worst, std::fabs(c.lhs - c.rhs));
      identity = identity && c.passed;
    }
    const double a0 = exact_mixture(space, 0).alpha;
    const double av = exact_mixture(space, space.v).alpha;
    const bool ok = worst <= 1e-12 && identity && std::fabs(a0 - 1.0) <= 1e-12 && av == 0.0;
    rows.push_back({"convergence", fmt::format("space{}", s), worst, 0.0, 1e-12, ok});
  }
  return rows;
}

std::vector<CheckRow> theory_granularity(const TheoryOptions& t) {
  std::vector<CheckRow> rows;
  for (int v : {2, 5, 10, 50}) {
    auto rng = Rng::derive(t.seed, {4, static_cast<std::uint64_t>(v)});
    const auto g = granularity_check(v, t.samples, rng);
    const bool pointwise = g.max_error <= 1.0 / (v - 1) + 1e-12;
    rows.push_back({"granularity", fmt::format("v{}", v), g.mean_error, g.target, 0.002,
                    std::fabs(g.mean_error - g.target) <= 0.002 && pointwise});
  }
  return rows;
}

int cmd_theory(const TheoryOptions& t, std::ostream& out) {
  using Driver = std::vector<CheckRow> (*)(const TheoryOptions&);
  const std::vector<std::pair<std::string, Driver>> drivers = {
      {"unbiased", theory_unbiased},
      {"variance", theory_variance},
      {"convergence", theory_convergence},
      {"granularity", theory_granularity},
  };
  out << "check,case,value,reference,tolerance,status\n";
  bool all_passed = true;
  bool matched = false;
  for (const auto& [name, driver] : drivers) {
    if (t.check != "all" && t.check != name) continue;
    matched = true;
    for (const auto& row : driver(t)) {
      print_row(out, row);
      all_passed = all_passed && row.passed;
    }
  }
  if (!matched) {
    throw CLI::ValidationError("check", "unknown theory check '" + t.check + "'");
  }
  return all_passed ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// gen-tasks

int cmd_gen_tasks(const ConfigOptions& opts, const std::string& path, std::ostream& out) {
  const auto cfg = resolve_config(opts);
  if (opts.print_config) {
    write_config(out, cfg);
    return kExitOk;
  }
  const auto suite = build_suite(cfg.task);
  save_problem_set(path, suite);
  out << fmt::format("wrote {} {} problems to {}\n", suite.problems.size(),
                     to_string(suite.env.kind()), path);
  return kExitOk;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"On-policy verbal distillation toolkit", "ovd"};
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 ok, 1 internal, 2 usage, 3 config, 4 check failed, 5 I/O, 6 numeric.\n"
      "OVD_OUT_DIR sets the default output directory.");

  ConfigOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train a student policy");
  add_config_options(train_cmd, train_opts);
  add_method_flags(train_cmd, train_opts);
  add_override(train_cmd, train_opts, "--steps", "train.steps", "Training iterations");
  train_cmd->add_option("--out", train_opts.out_dir, "Output directory");

  ConfigOptions eval_opts;
  EvalOptions eval_extra;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint over test thresholds");
  add_config_options(eval_cmd, eval_opts);
  add_method_flags(eval_cmd, eval_opts);
  eval_cmd->add_option("--checkpoint", eval_extra.checkpoint, "Policy checkpoint")->required();
  eval_cmd->add_option("--problems", eval_extra.problems, "Problem-set JSON file");
  eval_cmd->add_option("--thetas", eval_extra.thetas, "Comma-separated test thresholds");
  eval_cmd->add_option("--modes", eval_extra.modes, "Comma-separated modes (det,sampled)");
  eval_cmd->add_option("--out", eval_opts.out_dir, "Output directory");

  ConfigOptions mem_opts;
  MemoryOptions mem_extra;
  auto* mem_cmd = app.add_subcommand("memory", "Memory footprint model");
  mem_cmd->require_subcommand(1);
  auto* table1_cmd = mem_cmd->add_subcommand("table1", "Per-component footprint at L");
  auto* sweep_cmd = mem_cmd->add_subcommand("sweep", "Footprint curves over L or N");
  auto* reduction_cmd = mem_cmd->add_subcommand("reduction", "Verbal footprint and N*V/v");
  for (auto* c : {table1_cmd, sweep_cmd, reduction_cmd}) add_config_options(c, mem_opts);
  for (auto* c : {table1_cmd, sweep_cmd}) {
    c->add_option("--units", mem_extra.units, "gb, gib or bytes")
        ->check(CLI::IsMember({"gb", "gib", "bytes"}));
  }
  sweep_cmd->add_option("--axis", mem_extra.axis, "L or N")->check(CLI::IsMember({"L", "N"}));
  sweep_cmd->add_option("--range", mem_extra.range, "a:b (doubling) or a:b:step");

  TheoryOptions theory;
  auto* theory_cmd = app.add_subcommand("theory", "Exact and Monte Carlo theory checks");
  theory_cmd->add_option("check", theory.check, "unbiased|variance|convergence|granularity|all")
      ->check(CLI::IsMember({"unbiased", "variance", "convergence", "granularity", "all"}));
  theory_cmd->add_option("--samples", theory.samples, "Monte Carlo samples per case")
      ->check(CLI::Range(std::uint64_t{2}, std::uint64_t{1'000'000'000}));
  theory_cmd->add_option("--seed", theory.seed, "Root seed");
  theory_cmd->add_option("--spaces", theory.spaces, "Random spaces for unbiased/variance")
      ->check(CLI::PositiveNumber);
  theory_cmd->add_option("--convergence-spaces", theory.convergence_spaces,
                         "Random spaces for the convergence identity")
      ->check(CLI::PositiveNumber);

  ConfigOptions gen_opts;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-tasks", "Write a problem-set file");
  add_config_options(gen_cmd, gen_opts);
  add_override(gen_cmd, gen_opts, "--kind", "task.kind", "math or qa");
  add_override(gen_cmd, gen_opts, "--pool-size", "task.pool_size", "Number of problems");
  add_override(gen_cmd, gen_opts, "--pool-seed", "task.pool_seed", "First problem seed");
  add_override(gen_cmd, gen_opts, "--chain-len", "task.chain_len", "Math chain length");
  add_override(gen_cmd, gen_opts, "--vocab-size", "task.vocab_size", "Math modulus");
  add_override(gen_cmd, gen_opts, "--hops", "task.hops", "QA hop count");
  add_override(gen_cmd, gen_opts, "--corpus", "task.corpus_path", "QA corpus file");
  gen_cmd->add_option("--out", gen_out, "Output JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*train_cmd) return cmd_train(train_opts, out);
  if (*eval_cmd) return cmd_eval(eval_opts, eval_extra, out);
  if (*table1_cmd) return cmd_memory_table1(mem_opts, mem_extra, out);
  if (*sweep_cmd) return cmd_memory_sweep(mem_opts, mem_extra, out);
  if (*reduction_cmd) return cmd_memory_reduction(mem_opts, out);
  if (*theory_cmd) return cmd_theory(theory, out);
  if (*gen_cmd) return cmd_gen_tasks(gen_opts, gen_out, out);
  return kExitUsage;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(argc, argv, out, err);
  } catch (const CLI::Error& e) {
    err << "ovd: error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "ovd: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "ovd: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GenerationError& e) {
    err << "ovd: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "ovd: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    err << "ovd: numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "ovd: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace ovd
