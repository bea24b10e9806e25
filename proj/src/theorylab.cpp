#include "ovd/theorylab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "ovd/error.hpp"
#include "ovd/rewards.hpp"

namespace ovd {

namespace {

void expand(const PolicyParams& policy, const Environment& env, const Problem& problem,
            int max_len, Trajectory& current, std::size_t emitted,
            std::vector<Trajectory>& out) {
  if (is_terminal(current.steps)) {
    Trajectory done = current;
    done.answer = extract_answer(problem, done.steps);
    done.truncated = false;
    out.push_back(std::move(done));
    if (out.size() > kMaxEnumeratedTrajectories) {
      throw ContractViolation("trajectory space exceeds the enumeration bound");
    }
    return;
  }
  if (emitted == static_cast<std::size_t>(max_len)) {
    throw ContractViolation(
        fmt::format("trajectory of {} is unfinished after {} steps", problem.id, max_len));
  }
  for (int a = 0; a < policy.vocab_size; ++a) {
    const auto before = current.steps.size();
    Step step = env.actions().to_step(a, problem, emitted);
    const bool is_query = step.kind == StepKind::query;
    current.steps.push_back(std::move(step));
    if (is_query) current.steps.push_back(env_lookup(env.corpus(), current.steps.back()));
    expand(policy, env, problem, max_len, current, emitted + 1, out);
    current.steps.resize(before);
  }
}

std::vector<double> scaled(const std::vector<double>& g, double s) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = s * g[i];
  return out;
}

double sq_norm(const std::vector<double>& g) {
  double s = 0.0;
  for (double x : g) s += x * x;
  return s;
}

}  // namespace

EnumeratedSpace enumerate_trajectories(const PolicyParams& policy, const Environment& env,
                                       const Problem& problem, const TeacherConfig& teacher,
                                       int max_len) {
  if (max_len < 1) throw ContractViolation("enumerate_trajectories: max_len must be >= 1");
  const double bound = std::pow(static_cast<double>(policy.vocab_size), max_len);
  if (bound > static_cast<double>(kMaxEnumeratedTrajectories)) {
    throw ContractViolation(fmt::format("vocab^max_len = {} exceeds the enumeration bound {}",
                                        bound, kMaxEnumeratedTrajectories));
  }
  EnumeratedSpace space;
  space.v = teacher.v;
  Trajectory root;
  root.problem_id = problem.id;
  expand(policy, env, problem, max_len, root, 0, space.trajectories);

  std::vector<std::vector<Decision>> paths;
  std::set<std::string> contexts;
  for (const auto& t : space.trajectories) {
    paths.push_back(decisions(policy, env, problem, t));
    for (const auto& d : paths.back()) contexts.insert(d.context);
  }
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (const auto& c : contexts) {
    for (int a = 0; a < policy.vocab_size; ++a) {
      index.emplace(std::make_pair(c, a), space.params.size());
      space.params.push_back({c, a});
    }
  }
  for (std::size_t i = 0; i < space.trajectories.size(); ++i) {
    const auto& t = space.trajectories[i];
    space.probs.push_back(std::exp(log_prob(policy, paths[i])));
    space.teacher_probs.push_back(teacher_trajectory_prob(t, problem, env, teacher));
    space.scores.push_back(discretize_score(quality(t, problem), teacher.v));
    space.rewards.push_back(reward(t, problem));
    std::vector<double> g(space.params.size(), 0.0);
    for (const auto& [ctx, row] : grad_log_prob(policy, paths[i])) {
      for (std::size_t a = 0; a < row.size(); ++a) {
        g[index.at({ctx, static_cast<int>(a)})] += row[a];
      }
    }
    space.grads.push_back(std::move(g));
  }
  return space;
}

EnumeratedSpace select_params(const EnumeratedSpace& space, const std::vector<std::size_t>& keep) {
  EnumeratedSpace out = space;
  out.params.clear();
  for (auto k : keep) out.params.push_back(space.params.at(k));
  for (std::size_t i = 0; i < space.size(); ++i) {
    out.grads[i].clear();
    for (auto k : keep) out.grads[i].push_back(space.grads[i].at(k));
  }
  return out;
}

Mixture exact_mixture(const EnumeratedSpace& space, int theta) {
  Mixture m;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.scores[i] >= theta) m.alpha += space.probs[i];
  }
  m.p_train.resize(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double accepted = space.scores[i] >= theta ? space.probs[i] : 0.0;
    m.p_train[i] = accepted + (1.0 - m.alpha) * space.teacher_probs[i];
  }
  return m;
}

ExactGradient exact_gradient(const EnumeratedSpace& space, int theta) {
  const auto dim = space.params.size();
  ExactGradient g;
  g.term1.assign(dim, 0.0);
  g.term2.assign(dim, 0.0);
  g.alpha = exact_mixture(space, theta).alpha;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double w1 = space.scores[i] >= theta ? space.probs[i] * space.rewards[i] : 0.0;
    const double w2 = (1.0 - g.alpha) * space.teacher_probs[i] * space.rewards[i];
    for (std::size_t p = 0; p < dim; ++p) {
      g.term1[p] += w1 * space.grads[i][p];
      g.term2[p] += w2 * space.grads[i][p];
    }
  }
  g.total.resize(dim);
  for (std::size_t p = 0; p < dim; ++p) g.total[p] = g.term1[p] + g.term2[p];
  return g;
}

namespace {

// Sample moments from counts of each distinct contribution vector.
McEstimate moments(const std::vector<std::vector<double>>& values,
                   const std::vector<std::uint64_t>& counts, std::uint64_t samples) {
  const auto dim = values.empty() ? 0 : values.front().size();
  McEstimate e;
  e.samples = samples;
  e.mean.assign(dim, 0.0);
  e.std_error.assign(dim, 0.0);
  const double n = static_cast<double>(samples);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (counts[k] == 0) continue;
    const double w = static_cast<double>(counts[k]) / n;
    for (std::size_t p = 0; p < dim; ++p) e.mean[p] += w * values[k][p];
  }
  for (std::size_t p = 0; p < dim; ++p) {
    double ss = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (counts[k] == 0) continue;
      const double d = values[k][p] - e.mean[p];
      ss += static_cast<double>(counts[k]) * d * d;
    }
    e.std_error[p] = samples > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  return e;
}

std::vector<std::vector<double>> contributions(const EnumeratedSpace& space) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    out.push_back(scaled(space.grads[i], space.rewards[i]));
  }
  return out;
}

// Outcome k < n: accepted student sample k; k >= n: teacher sample k - n.
std::vector<std::uint64_t> rs_counts(const EnumeratedSpace& space, int theta,
                                     std::uint64_t samples, Rng& rng) {
  const auto n = space.size();
  std::vector<std::uint64_t> counts(2 * n, 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const auto i = rng.categorical(space.probs);
    if (space.scores[i] >= theta) {
      ++counts[i];
    } else {
      ++counts[n + rng.categorical(space.teacher_probs)];
    }
  }
  return counts;
}

std::vector<std::uint64_t> plain_counts(const EnumeratedSpace& space, std::uint64_t samples,
                                        Rng& rng) {
  std::vector<std::uint64_t> counts(space.size(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) ++counts[rng.categorical(space.probs)];
  return counts;
}

void check_samples(std::uint64_t samples) {
  if (samples < 2) throw ContractViolation("Monte Carlo estimates need at least 2 samples");
}

// Total variance of a discrete vector distribution and the standard error of
// its sample estimate (delta method on the scalar ||g - mean||^2).
struct TraceVariance {
  double value = 0.0;
  double se = 0.0;
};

TraceVariance trace_variance(const std::vector<std::vector<double>>& values,
                             const std::vector<double>& weights, std::uint64_t samples) {
  const auto dim = values.empty() ? 0 : values.front().size();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (std::size_t p = 0; p < dim; ++p) mean[p] += weights[k] * values[k][p];
  }
  double m2 = 0.0;
  double m4 = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (weights[k] == 0.0) continue;
    double d2 = 0.0;
    for (std::size_t p = 0; p < dim; ++p) d2 += (values[k][p] - mean[p]) * (values[k][p] - mean[p]);
    m2 += weights[k] * d2;
    m4 += weights[k] * d2 * d2;
  }
  TraceVariance t;
  t.value = m2;
  t.se = std::sqrt(std::max(0.0, m4 - m2 * m2) / static_cast<double>(samples));
  return t;
}

}  // namespace

McEstimate mc_gradient(const EnumeratedSpace& space, int theta, std::uint64_t samples, Rng& rng) {
  check_samples(samples);
  auto values = contributions(space);
  const auto copy = values;
  values.insert(values.end(), copy.begin(), copy.end());
  return moments(values, rs_counts(space, theta, samples, rng), samples);
}

McEstimate mc_plain_gradient(const EnumeratedSpace& space, std::uint64_t samples, Rng& rng) {
  check_samples(samples);
  return moments(contributions(space), plain_counts(space, samples, rng), samples);
}

VarianceReport estimator_variances(const EnumeratedSpace& space, int theta,
                                   std::uint64_t samples, Rng& rng) {
  check_samples(samples);
  const auto n = space.size();
  const auto c = contributions(space);
  const double alpha = exact_mixture(space, theta).alpha;

  std::vector<std::vector<double>> rs_values = c;
  rs_values.insert(rs_values.end(), c.begin(), c.end());
  std::vector<double> rs_weights(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    rs_weights[i] = space.scores[i] >= theta ? space.probs[i] : 0.0;
    rs_weights[n + i] = (1.0 - alpha) * space.teacher_probs[i];
  }

  VarianceReport r;
  r.exact_v0 = trace_variance(c, space.probs, samples).value;
  r.exact_vrs = trace_variance(rs_values, rs_weights, samples).value;
  for (std::size_t i = 0; i < n; ++i) {
    if (space.scores[i] < theta) r.bound_term += space.probs[i] * sq_norm(c[i]);
  }

  const double total = static_cast<double>(samples);
  auto empirical = [&](const std::vector<std::vector<double>>& values,
                       const std::vector<std::uint64_t>& counts) {
    std::vector<double> w(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) w[k] = static_cast<double>(counts[k]) / total;
    auto t = trace_variance(values, w, samples);
    t.value *= total / (total - 1.0);
    return t;
  };
  const auto e0 = empirical(c, plain_counts(space, samples, rng));
  const auto ers = empirical(rs_values, rs_counts(space, theta, samples, rng));
  r.empirical_v0 = e0.value;
  r.se_v0 = e0.se;
  r.empirical_vrs = ers.value;
  r.se_vrs = ers.se;
  return r;
}

ConvergenceReport convergence_check(const EnumeratedSpace& space, int theta) {
  ConvergenceReport r;
  for (std::size_t i = 0; i < space.size(); ++i) {
    r.j_teacher += space.teacher_probs[i] * space.rewards[i];
  }
  if (r.j_teacher == 0.0) {
    throw ContractViolation("convergence check needs J(pi_T) > 0; delta is undefined");
  }
  const auto mix = exact_mixture(space, theta);
  r.alpha = mix.alpha;
  double accepted_reward = 0.0;  // sum pi_S R over accepted y
  for (std::size_t i = 0; i < space.size(); ++i) {
    r.lhs += mix.p_train[i] * space.rewards[i];
    if (space.scores[i] >= theta) accepted_reward += space.probs[i] * space.rewards[i];
  }
  const double conditional = r.alpha > 0.0 ? accepted_reward / r.alpha : r.j_teacher;
  r.delta = r.alpha > 0.0 ? (r.j_teacher - conditional) / r.j_teacher : 0.0;
  r.rhs = (1.0 - r.alpha * r.delta) * r.j_teacher;
  r.passed = std::fabs(r.lhs - r.rhs) <= 1e-12;
  return r;
}

GranularityReport granularity_check(int v, std::uint64_t samples, Rng& rng) {
  check_samples(samples);
  GranularityReport r;
  r.v = v;
  r.target = 1.0 / (2.0 * static_cast<double>(v - 1));
  double sum = 0.0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double q = rng.uniform();
    const double err = std::fabs(q - discretize_score(q, v) / static_cast<double>(v - 1));
    sum += err;
    r.max_error = std::max(r.max_error, err);
  }
  r.mean_error = sum / static_cast<double>(samples);
  return r;
}

EnumeratedSpace random_space(std::uint64_t seed, bool deterministic_teacher) {
  Rng rng(seed);
  const int vocab = 2 + static_cast<int>(rng.below(2));
  const int len = 1 + static_cast<int>(rng.below(2));
  const auto problem = generate_math_problem(rng.next(), len, vocab);
  const auto env = Environment::math(vocab);
  TeacherConfig teacher;
  teacher.score_temp = 0.0;
  teacher.error_rate = deterministic_teacher ? 0.0 : 0.5 * rng.uniform();

  auto policy = make_policy(vocab, 2);
  const auto skeleton = enumerate_trajectories(policy, env, problem, teacher, len);
  for (const auto& cell : skeleton.params) {
    row_for_update(policy, cell.context)[static_cast<std::size_t>(cell.action)] =
        4.0 * rng.uniform() - 2.0;
  }
  return enumerate_trajectories(policy, env, problem, teacher, len);
}

EnumeratedSpace toy_space() {
  const auto problem = generate_math_problem(0, 1, 2);
  const auto env = Environment::math(2);
  TeacherConfig teacher;
  teacher.score_temp = 0.0;
  auto policy = make_policy(2, 2);
  const auto oracle = *env.actions().action_of(problem.oracle_steps.front());
  const auto ctx = context_key(problem, {}, policy.context_order);
  row_for_update(policy, ctx)[static_cast<std::size_t>(oracle)] = std::log(1.5);
  auto space = enumerate_trajectories(policy, env, problem, teacher, 1);
  const auto it = std::find(space.params.begin(), space.params.end(), ParamCell{ctx, oracle});
  return select_params(space, {static_cast<std::size_t>(it - space.params.begin())});
}

}  // namespace ovd
