#include "ovd/rewards.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

namespace ovd {

std::vector<std::string> normalize_words(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  for (const auto& token : tokens) {
    for (const auto& word : split_words(token)) {
      std::string w;
      for (char c : word) {
        const auto u = static_cast<unsigned char>(c);
        if (std::ispunct(u)) continue;
        w += static_cast<char>(std::tolower(u));
      }
      if (!w.empty()) out.push_back(std::move(w));
    }
  }
  return out;
}

double f1_reward(std::span<const std::string> answer, std::span<const std::string> gold) {
  const auto a = normalize_words(answer);
  const auto g = normalize_words(gold);
  if (a.empty() && g.empty()) return 1.0;
  if (a.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& w : g) ++counts[w];
  std::size_t common = 0;
  for (const auto& w : a) {
    auto it = counts.find(w);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + g.size());
}

namespace {

std::string fold(std::string_view text) {
  std::string out;
  for (const auto& w : split_words(text)) {
    if (!out.empty()) out += ' ';
    for (char c : w) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::optional<double> parse_decimal(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string_view body = text;
  if (body.front() == '+') body.remove_prefix(1);
  if (body.empty()) return std::nullopt;
  // Only plain signed decimals; "inf", "nan" and exponents are not numbers here.
  bool digit = false;
  bool dot = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '-' && i == 0) continue;
    if (c == '.' && !dot) {
      dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    digit = true;
  }
  if (!digit) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc() || ptr != body.data() + body.size()) return std::nullopt;
  return value;
}

}  // namespace

std::optional<double> parse_number(std::string_view text) {
  const auto folded = fold(text);
  const std::string_view t(folded);
  if (t.find(' ') != std::string_view::npos) return std::nullopt;
  const auto slash = t.find('/');
  if (slash == std::string_view::npos) return parse_decimal(t);
  const auto num = parse_decimal(t.substr(0, slash));
  const auto den = parse_decimal(t.substr(slash + 1));
  if (!num || !den || *den == 0.0) return std::nullopt;
  return *num / *den;
}

double exact_match_reward(std::span<const std::string> answer,
                          std::span<const std::string> gold) {
  if (answer.empty() || answer.size() != gold.size()) return 0.0;
  for (std::size_t i = 0; i < answer.size(); ++i) {
    const auto a = parse_number(answer[i]);
    const auto g = parse_number(gold[i]);
    if (a && g) {
      if (std::fabs(*a - *g) > kNumericTolerance) return 0.0;
    } else if (fold(answer[i]) != fold(gold[i])) {
      return 0.0;
    }
  }
  return 1.0;
}

double reward(const Trajectory& trajectory, const Problem& problem) {
  if (trajectory.truncated || trajectory.answer.empty()) return 0.0;
  return problem.kind == TaskKind::qa ? f1_reward(trajectory.answer, problem.gold_answer)
                                      : exact_match_reward(trajectory.answer, problem.gold_answer);
}

}  // namespace ovd
