#include "ovd/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "ovd/error.hpp"

namespace ovd {

PolicyParams make_policy(int vocab_size, int context_order) {
  if (vocab_size < 1) throw ConfigError("policy vocab_size must be positive");
  if (context_order < 0) throw ConfigError("policy context_order must be non-negative");
  PolicyParams p;
  p.vocab_size = vocab_size;
  p.context_order = context_order;
  return p;
}

std::string context_key(const Problem& problem, std::span<const Step> history, int order) {
  const auto stream = visible_stream(problem, history);
  std::string key;
  const auto n = static_cast<std::ptrdiff_t>(order);
  const auto size = static_cast<std::ptrdiff_t>(stream.size());
  for (std::ptrdiff_t i = size - n; i < size; ++i) {
    if (!key.empty() || i != size - n) key += ' ';
    if (i < 0) {
      key += kPadToken;
    } else {
      key += stream[static_cast<std::size_t>(i)];
    }
  }
  return key;
}

const LogitRow* find_row(const PolicyParams& params, std::string_view context) {
  auto it = params.logits.find(std::string(context));
  return it == params.logits.end() ? nullptr : &it->second;
}

LogitRow& row_for_update(PolicyParams& params, const std::string& context) {
  auto [it, inserted] = params.logits.try_emplace(context);
  if (inserted) it->second.assign(static_cast<std::size_t>(params.vocab_size), 0.0);
  return it->second;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

namespace {

double log_softmax_at(std::span<const double> logits, int action) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  return logits[static_cast<std::size_t>(action)] - m - std::log(z);
}

}  // namespace

std::vector<double> action_distribution(const PolicyParams& params, std::string_view context) {
  if (const auto* row = find_row(params, context)) return softmax(*row);
  return std::vector<double>(static_cast<std::size_t>(params.vocab_size),
                             1.0 / static_cast<double>(params.vocab_size));
}

std::vector<Decision> decisions(const PolicyParams& params, const Environment& env,
                                const Problem& problem, const Trajectory& trajectory) {
  std::vector<Decision> out;
  const auto& steps = trajectory.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].kind == StepKind::doc) continue;
    const auto action = env.actions().action_of(steps[i]);
    if (!action || *action >= params.vocab_size) {
      throw ContractViolation(fmt::format("step '{}:{}' of {} is outside the action vocabulary",
                                          to_string(steps[i].kind), steps[i].token,
                                          trajectory.problem_id));
    }
    out.push_back({context_key(problem, std::span(steps).first(i), params.context_order), *action});
  }
  return out;
}

Trajectory sample_trajectory(const PolicyParams& params, const Environment& env,
                             const Problem& problem, Rng& rng, int max_steps) {
  if (max_steps < 1) throw ContractViolation("sample_trajectory: max_steps must be >= 1");
  Trajectory t;
  t.problem_id = problem.id;
  t.source = Source::student;
  std::size_t emitted = 0;
  while (emitted < static_cast<std::size_t>(max_steps)) {
    const auto ctx = context_key(problem, t.steps, params.context_order);
    const auto probs = action_distribution(params, ctx);
    const auto action = static_cast<int>(rng.categorical(probs));
    Step step = env.actions().to_step(action, problem, emitted);
    ++emitted;
    const bool is_query = step.kind == StepKind::query;
    t.steps.push_back(std::move(step));
    if (is_query) t.steps.push_back(env_lookup(env.corpus(), t.steps.back()));
    if (is_terminal(t.steps)) break;
  }
  t.truncated = !is_terminal(t.steps);
  t.answer = extract_answer(problem, t.steps);
  return t;
}

double log_prob(const PolicyParams& params, std::span<const Decision> path) {
  double total = 0.0;
  for (const auto& d : path) {
    if (d.action < 0 || d.action >= params.vocab_size) {
      throw ContractViolation(fmt::format("action {} outside vocabulary", d.action));
    }
    if (const auto* row = find_row(params, d.context)) {
      total += log_softmax_at(*row, d.action);
    } else {
      total -= std::log(static_cast<double>(params.vocab_size));
    }
  }
  return total;
}

double log_prob(const PolicyParams& params, const Environment& env, const Problem& problem,
                const Trajectory& trajectory) {
  return log_prob(params, decisions(params, env, problem, trajectory));
}

GradTable grad_log_prob(const PolicyParams& params, std::span<const Decision> path) {
  GradTable g;
  for (const auto& d : path) {
    const auto probs = action_distribution(params, d.context);
    auto [it, inserted] = g.try_emplace(d.context);
    if (inserted) it->second.assign(probs.size(), 0.0);
    auto& row = it->second;
    for (std::size_t a = 0; a < probs.size(); ++a) row[a] -= probs[a];
    row[static_cast<std::size_t>(d.action)] += 1.0;
  }
  return g;
}

GradTable grad_log_prob(const PolicyParams& params, const Environment& env,
                        const Problem& problem, const Trajectory& trajectory) {
  return grad_log_prob(params, decisions(params, env, problem, trajectory));
}

void accumulate(GradTable& acc, const GradTable& g, double scale) {
  for (const auto& [ctx, row] : g) {
    auto [it, inserted] = acc.try_emplace(ctx);
    if (inserted) it->second.assign(row.size(), 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) it->second[i] += scale * row[i];
  }
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr std::string_view kMagic = "ovd-policy";
constexpr int kVersion = 1;
}  // namespace

void write_checkpoint(std::ostream& out, const PolicyParams& params) {
  out << fmt::format("{} {}\n", kMagic, kVersion);
  out << fmt::format("context_order {}\n", params.context_order);
  out << fmt::format("vocab_size {}\n", params.vocab_size);
  out << fmt::format("rows {}\n", params.logits.size());
  for (const auto& [ctx, row] : params.logits) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      out << fmt::format("{}\t{}\t{}\n", ctx, a, row[a]);
    }
  }
}

namespace {

std::string expect_header(std::istream& in, const std::string& source, std::size_t line_no,
                          std::string_view key) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, line_no, "unexpected end of file");
  if (line.rfind(std::string(key) + " ", 0) != 0) {
    throw ParseError(source, line_no, fmt::format("expected '{} <value>'", key));
  }
  return line.substr(key.size() + 1);
}

long long parse_int(const std::string& text, const std::string& source, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ParseError(source, line_no, fmt::format("invalid integer '{}'", text));
  }
}

}  // namespace

PolicyParams read_checkpoint(std::istream& in, const std::string& source_name) {
  const auto version = expect_header(in, source_name, 1, kMagic);
  if (parse_int(version, source_name, 1) != kVersion) {
    throw ParseError(source_name, 1, fmt::format("unsupported checkpoint version {}", version));
  }
  PolicyParams p;
  p.context_order =
      static_cast<int>(parse_int(expect_header(in, source_name, 2, "context_order"), source_name, 2));
  p.vocab_size =
      static_cast<int>(parse_int(expect_header(in, source_name, 3, "vocab_size"), source_name, 3));
  const auto rows = parse_int(expect_header(in, source_name, 4, "rows"), source_name, 4);
  if (p.vocab_size < 1 || p.context_order < 0 || rows < 0) {
    throw ParseError(source_name, 4, "invalid checkpoint dimensions");
  }
  std::string line;
  std::size_t line_no = 4;
  long long expected = rows * p.vocab_size;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw ParseError(source_name, line_no, "expected 3 fields");
    const std::string ctx = line.substr(0, t1);
    const auto token = parse_int(line.substr(t1 + 1, t2 - t1 - 1), source_name, line_no);
    if (token < 0 || token >= p.vocab_size) {
      throw ParseError(source_name, line_no, fmt::format("token id {} out of range", token));
    }
    const std::string value_text = line.substr(t2 + 1);
    char* end = nullptr;
    const double value = std::strtod(value_text.c_str(), &end);
    if (end == value_text.c_str() || *end != '\0' || !std::isfinite(value)) {
      throw ParseError(source_name, line_no, fmt::format("invalid logit '{}'", value_text));
    }
    row_for_update(p, ctx)[static_cast<std::size_t>(token)] = value;
    --expected;
  }
  if (expected != 0 || static_cast<long long>(p.logits.size()) != rows) {
    throw ParseError(source_name, line_no, "row count does not match header");
  }
  return p;
}

void save_checkpoint(const std::string& path, const PolicyParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write checkpoint '{}'", path));
  write_checkpoint(out, params);
  if (!out) throw IoError(fmt::format("failed writing checkpoint '{}'", path));
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open checkpoint '{}'", path));
  return read_checkpoint(in, path);
}

}  // namespace ovd
