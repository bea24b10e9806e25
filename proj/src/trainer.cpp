#include "ovd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "ovd/error.hpp"

namespace ovd {

std::string_view to_string(CreditMode mode) {
  return mode == CreditMode::trajectory ? "trajectory" : "step";
}

CreditMode parse_credit_mode(std::string_view text) {
  if (text == "trajectory") return CreditMode::trajectory;
  if (text == "step") return CreditMode::step;
  throw ConfigError(fmt::format("unknown credit mode '{}' (expected trajectory or step)", text));
}

void TrainConfig::validate() const {
  if (group_size < 2) throw ConfigError("train.group_size must be >= 2");
  if (batch_problems < 1) throw ConfigError("train.batch_problems must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be positive");
  if (!(eps_clip > 0.0 && eps_clip < 1.0)) throw ConfigError("train.eps_clip must lie in (0, 1)");
  if (!(eps_adv >= 0.0)) throw ConfigError("train.eps_adv must be non-negative");
  if (!(kl_coef >= 0.0)) throw ConfigError("train.kl_coef must be non-negative");
  if (steps < 0) throw ConfigError("train.steps must be non-negative");
  if (updates_per_batch < 1) throw ConfigError("train.updates_per_batch must be >= 1");
  if (max_rollout_steps < 1) throw ConfigError("train.max_rollout_steps must be >= 1");
  if (alpha_window < 1) throw ConfigError("train.alpha_window must be >= 1");
  if (threads < 1) throw ConfigError("train.threads must be >= 1");
  if (context_order < 0) throw ConfigError("train.context_order must be >= 0");
  teacher.validate();
  rejection.validate(teacher.v);
}

void write_metrics_row(std::ostream& out, const TrainMetrics& m) {
  out << fmt::format("{},{},{},{},{},{},{}\n", m.step, m.mean_reward, m.alpha, m.clip_fraction,
                     m.mean_advantage, m.loss, m.kl);
}

std::vector<double> group_advantages(std::span<const double> rewards, double eps_adv) {
  if (rewards.size() < 2) throw ContractViolation("group_advantages needs at least 2 rewards");
  std::vector<double> adv(rewards.size(), 0.0);
  // A constant group carries no signal; its mean need not round back exactly.
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) {
    return adv;
  }
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    const double centered = rewards[i] - mean;
    adv[i] = centered == 0.0 ? 0.0 : centered / (sd + eps_adv);
  }
  return adv;
}

double clipped_objective(double rho, double advantage, double eps_clip) {
  if (!(rho > 0.0)) throw ContractViolation(fmt::format("importance ratio {} must be > 0", rho));
  const double clipped = std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip);
  return std::min(rho * advantage, clipped * advantage);
}

bool is_clipped(double rho, double advantage, double eps_clip) {
  const double clipped = std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip);
  return clipped * advantage < rho * advantage;
}

std::vector<double> step_rewards(const Trajectory& trajectory, const Problem& problem,
                                 double trajectory_reward, const TeacherConfig& teacher,
                                 CreditMode mode, Rng& rng) {
  const auto k = trajectory.policy_step_count();
  if (mode == CreditMode::trajectory) return std::vector<double>(k, trajectory_reward);
  std::vector<double> out;
  out.reserve(k);
  for (int s : step_scores(trajectory, problem, teacher, rng)) {
    out.push_back(static_cast<double>(s) / static_cast<double>(teacher.v - 1));
  }
  return out;
}

void AlphaTracker::push(double alpha_contrib) {
  recent_.push_back(alpha_contrib);
  while (recent_.size() > static_cast<std::size_t>(window_)) recent_.pop_front();
}

double AlphaTracker::value() const {
  const std::vector<double> v(recent_.begin(), recent_.end());
  return acceptance_rate(std::span<const double>(v));
}

namespace {

struct MemberWork {
  std::vector<Decision> path;
  std::vector<double> advantages;  // one per decision
  double old_log_prob = 0.0;
};

std::vector<GroupBatch> build_groups(const PolicyParams& policy,
                                     std::span<const Problem> problems, const Environment& env,
                                     const TrainConfig& cfg, int step) {
  std::vector<GroupBatch> groups(problems.size());
  auto build = [&](std::size_t b) {
    const GroupKey key{cfg.seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(b)};
    groups[b] = build_training_group(problems[b], env, policy, cfg.teacher, cfg.rejection,
                                     cfg.group_size, cfg.max_rollout_steps, key);
  };
  if (cfg.threads <= 1 || problems.size() <= 1) {
    for (std::size_t b = 0; b < problems.size(); ++b) build(b);
    return groups;
  }
  // Each task writes only its own slots; results are independent of scheduling.
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads),
                                             problems.size());
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t b = w; b < problems.size(); b += workers) build(b);
    }));
  }
  for (auto& t : tasks) t.get();
  return groups;
}

// KL(p || q) for one row of logits.
double row_kl(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) kl += p[a] * (std::log(p[a]) - std::log(q[a]));
  }
  return kl;
}

}  // namespace

StepOutput train_step(PolicyParams& policy, std::span<const Problem> problems,
                      const Environment& env, const TrainConfig& cfg, int step,
                      AlphaTracker& alpha) {
  StepOutput out;
  out.groups = build_groups(policy, problems, env, cfg, step);
  const PolicyParams old = policy;

  std::vector<MemberWork> work;
  double reward_sum = 0.0;
  double adv_sum = 0.0;
  std::size_t adv_count = 0;
  std::size_t member_count = 0;
  for (std::size_t b = 0; b < problems.size(); ++b) {
    const auto& group = out.groups[b];
    const GroupKey key{cfg.seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(b)};
    std::vector<std::vector<double>> credits;
    for (std::size_t j = 0; j < group.members.size(); ++j) {
      const auto& m = group.members[j];
      reward_sum += m.student_reward;
      ++member_count;
      auto rng = member_stream(key, j, StreamPurpose::step_score);
      credits.push_back(
          step_rewards(m.trajectory, problems[b], m.reward, cfg.teacher, cfg.credit_mode, rng));
    }
    std::vector<std::vector<double>> advantages(credits.size());
    if (cfg.credit_mode == CreditMode::trajectory) {
      std::vector<double> rewards;
      for (const auto& m : group.members) rewards.push_back(m.reward);
      const auto adv = group_advantages(rewards, cfg.eps_adv);
      for (std::size_t j = 0; j < credits.size(); ++j) {
        advantages[j].assign(credits[j].size(), adv[j]);
        adv_sum += adv[j];
        ++adv_count;
      }
    } else {
      // Step rewards of the whole group are normalized jointly.
      std::vector<double> flat;
      for (const auto& c : credits) flat.insert(flat.end(), c.begin(), c.end());
      const auto adv = flat.size() >= 2 ? group_advantages(flat, cfg.eps_adv)
                                        : std::vector<double>(flat.size(), 0.0);
      std::size_t i = 0;
      for (std::size_t j = 0; j < credits.size(); ++j) {
        for (std::size_t k = 0; k < credits[j].size(); ++k, ++i) {
          advantages[j].push_back(adv[i]);
          adv_sum += adv[i];
          ++adv_count;
        }
      }
    }
    for (std::size_t j = 0; j < group.members.size(); ++j) {
      MemberWork w;
      w.path = decisions(old, env, problems[b], group.members[j].trajectory);
      w.advantages = std::move(advantages[j]);
      w.old_log_prob = log_prob(old, w.path);
      work.push_back(std::move(w));
    }
  }

  std::set<std::string> visited;
  for (const auto& w : work) {
    for (const auto& d : w.path) visited.insert(d.context);
  }

  const double inv_members = 1.0 / static_cast<double>(work.size());
  double loss = 0.0;
  double kl = 0.0;
  std::size_t clipped = 0;
  std::size_t terms = 0;
  for (int pass = 0; pass < cfg.updates_per_batch; ++pass) {
    GradTable ascent;  // gradient of the objective, to be added with rate lr
    double objective = 0.0;
    clipped = 0;
    terms = 0;
    for (const auto& w : work) {
      const double rho = std::exp(log_prob(policy, w.path) - w.old_log_prob);
      double member_obj = 0.0;
      for (std::size_t k = 0; k < w.path.size(); ++k) {
        const double a = w.advantages[k];
        member_obj += clipped_objective(rho, a, cfg.eps_clip);
        ++terms;
        if (is_clipped(rho, a, cfg.eps_clip)) {
          ++clipped;
          continue;
        }
        const double coef = rho * a * inv_members;
        if (coef == 0.0) continue;
        const auto& d = w.path[k];
        const auto probs = action_distribution(policy, d.context);
        auto [it, inserted] = ascent.try_emplace(d.context);
        if (inserted) it->second.assign(probs.size(), 0.0);
        for (std::size_t a2 = 0; a2 < probs.size(); ++a2) it->second[a2] -= coef * probs[a2];
        it->second[static_cast<std::size_t>(d.action)] += coef;
      }
      if (!w.path.empty()) objective += member_obj / static_cast<double>(w.path.size());
    }
    loss = -objective * inv_members;

    GradTable kl_grad;
    kl = 0.0;
    if (cfg.kl_enabled && !visited.empty()) {
      const double inv_ctx = 1.0 / static_cast<double>(visited.size());
      for (const auto& ctx : visited) {
        const auto p = action_distribution(policy, ctx);
        const auto q = action_distribution(old, ctx);
        const double k = row_kl(p, q);
        kl += k * inv_ctx;
        LogitRow g(p.size(), 0.0);
        bool nonzero = false;
        for (std::size_t a = 0; a < p.size(); ++a) {
          g[a] = inv_ctx * p[a] * ((std::log(p[a]) - std::log(q[a])) - k);
          nonzero = nonzero || g[a] != 0.0;
        }
        if (nonzero) kl_grad.emplace(ctx, std::move(g));
      }
      loss += cfg.kl_coef * kl;
    }
    if (!std::isfinite(loss)) {
      throw NumericError(fmt::format("non-finite loss {} at step {} pass {}", loss, step, pass));
    }

    for (const auto& [ctx, g] : ascent) {
      if (std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; })) continue;
      auto& row = row_for_update(policy, ctx);
      for (std::size_t a = 0; a < g.size(); ++a) row[a] += cfg.lr * g[a];
    }
    for (const auto& [ctx, g] : kl_grad) {
      auto& row = row_for_update(policy, ctx);
      for (std::size_t a = 0; a < g.size(); ++a) row[a] -= cfg.lr * cfg.kl_coef * g[a];
    }
    for (const auto& [ctx, row] : policy.logits) {
      for (double x : row) {
        if (!std::isfinite(x)) {
          throw NumericError(fmt::format("non-finite logit in context '{}' at step {}", ctx, step));
        }
      }
    }
  }

  for (const auto& g : out.groups) alpha.push(g.alpha_contrib);
  auto& m = out.metrics;
  m.step = step;
  m.mean_reward = member_count == 0 ? 0.0 : reward_sum / static_cast<double>(member_count);
  m.alpha = alpha.value();
  m.clip_fraction = terms == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(terms);
  m.mean_advantage = adv_count == 0 ? 0.0 : adv_sum / static_cast<double>(adv_count);
  m.loss = loss;
  m.kl = cfg.kl_enabled ? kl : 0.0;
  return out;
}

std::vector<Problem> batch_for_step(const TaskSuite& suite, const TrainConfig& cfg, int step) {
  const auto& pool = suite.problems;
  if (pool.empty()) throw ConfigError("task suite has no problems");
  if (pool.size() <= static_cast<std::size_t>(cfg.batch_problems)) return pool;
  auto rng = Rng::derive(cfg.seed, {static_cast<std::uint64_t>(step), 0x626174636855ULL});
  std::vector<Problem> batch;
  for (int b = 0; b < cfg.batch_problems; ++b) batch.push_back(pool[rng.below(pool.size())]);
  return batch;
}

PolicyParams train(const TrainConfig& cfg, const TaskSuite& suite, PolicyParams initial,
                   const MetricsSink& sink) {
  cfg.validate();
  if (initial.vocab_size != suite.env.actions().size()) {
    throw ConfigError(fmt::format("policy vocabulary {} does not match task vocabulary {}",
                                  initial.vocab_size, suite.env.actions().size()));
  }
  AlphaTracker alpha(cfg.alpha_window);
  for (int step = 1; step <= cfg.steps; ++step) {
    const auto batch = batch_for_step(suite, cfg, step);
    const auto out = train_step(initial, batch, suite.env, cfg, step, alpha);
    if (sink) sink(out.metrics);
  }
  return initial;
}

}  // namespace ovd
