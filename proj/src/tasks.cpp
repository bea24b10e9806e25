#include "ovd/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "ovd/error.hpp"
#include "ovd/rng.hpp"

namespace ovd {

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::math ? "math" : "qa";
}

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::reason: return "reason";
    case StepKind::query: return "query";
    case StepKind::doc: return "doc";
    case StepKind::answer: return "answer";
  }
  return "?";
}

std::string_view to_string(Source source) {
  return source == Source::student ? "student" : "teacher";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "math") return TaskKind::math;
  if (text == "qa") return TaskKind::qa;
  throw ConfigError(fmt::format("unknown task kind '{}' (expected math or qa)", text));
}

StepKind parse_step_kind(std::string_view text) {
  if (text == "reason") return StepKind::reason;
  if (text == "query") return StepKind::query;
  if (text == "doc") return StepKind::doc;
  if (text == "answer") return StepKind::answer;
  throw ConfigError(fmt::format("unknown step kind '{}'", text));
}

std::size_t Trajectory::policy_step_count() const {
  return static_cast<std::size_t>(std::count_if(
      steps.begin(), steps.end(), [](const Step& s) { return s.kind != StepKind::doc; }));
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<Triple> records) {
  for (auto& r : records) add(std::move(r));
}

void Corpus::add(Triple record) {
  auto key = std::make_pair(record.subject, record.relation);
  if (index_.contains(key)) {
    throw ContractViolation(
        fmt::format("duplicate corpus key ({}, {})", record.subject, record.relation));
  }
  index_.emplace(std::move(key), records_.size());
  records_.push_back(std::move(record));
}

std::optional<std::string_view> Corpus::lookup(std::string_view subject,
                                               std::string_view relation) const {
  auto it = index_.find(std::make_pair(std::string(subject), std::string(relation)));
  if (it == index_.end()) return std::nullopt;
  return std::string_view(records_[it->second].object);
}

std::vector<std::string> Corpus::entities() const {
  std::set<std::string> names;
  for (const auto& r : records_) {
    names.insert(r.subject);
    names.insert(r.object);
  }
  return {names.begin(), names.end()};
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

Corpus parse_corpus(std::istream& in, const std::string& source_name) {
  Corpus corpus;
  std::map<std::pair<std::string, std::string>, std::size_t> first_seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(source_name, line_no,
                       fmt::format("expected 3 tab-separated fields, got {}", fields.size()));
    }
    for (const auto f : fields) {
      if (f.empty()) throw ParseError(source_name, line_no, "empty field");
    }
    if (fields[0].find(kKeySeparator) != std::string_view::npos ||
        fields[1].find(kKeySeparator) != std::string_view::npos) {
      throw ParseError(source_name, line_no, "subject and relation may not contain '|'");
    }
    Triple t{std::string(fields[0]), std::string(fields[1]), std::string(fields[2])};
    auto key = std::make_pair(t.subject, t.relation);
    if (auto it = first_seen.find(key); it != first_seen.end()) {
      throw ParseError(source_name, line_no,
                       fmt::format("duplicate key ({}, {}) first defined on line {}",
                                   t.subject, t.relation, it->second));
    }
    first_seen.emplace(std::move(key), line_no);
    corpus.add(std::move(t));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open corpus file '{}'", path.string()));
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& r : corpus.records()) {
    out << r.subject << '\t' << r.relation << '\t' << r.object << '\n';
  }
}

Corpus synthetic_corpus(std::uint64_t seed, int entities, int relations) {
  if (entities < 2 || relations < 1) {
    throw ConfigError("synthetic corpus needs at least 2 entities and 1 relation");
  }
  Rng rng(seed);
  Corpus corpus;
  for (int e = 0; e < entities; ++e) {
    for (int r = 0; r < relations; ++r) {
      auto other = static_cast<int>(rng.below(static_cast<std::uint64_t>(entities - 1)));
      if (other >= e) ++other;
      corpus.add({fmt::format("e{}", e), fmt::format("r{}", r), fmt::format("e{}", other)});
    }
  }
  return corpus;
}

std::string make_query_token(std::string_view subject, std::string_view relation) {
  std::string token(subject);
  token += kKeySeparator;
  token += relation;
  return token;
}

// ---------------------------------------------------------------------------
// ActionSpace

ActionSpace ActionSpace::math(int modulus) {
  if (modulus < 2) throw ConfigError("math vocab_size must be >= 2");
  ActionSpace space;
  space.kind_ = TaskKind::math;
  space.modulus_ = modulus;
  return space;
}

ActionSpace ActionSpace::qa(const Corpus& corpus) {
  ActionSpace space;
  space.kind_ = TaskKind::qa;
  std::vector<std::string> keys;
  keys.reserve(corpus.size());
  for (const auto& r : corpus.records()) keys.push_back(make_query_token(r.subject, r.relation));
  std::sort(keys.begin(), keys.end());
  for (auto& k : keys) space.qa_actions_.push_back({StepKind::query, std::move(k)});
  const auto names = corpus.entities();
  for (const auto& e : names) space.qa_actions_.push_back({StepKind::reason, e});
  for (const auto& e : names) space.qa_actions_.push_back({StepKind::answer, e});
  for (std::size_t i = 0; i < space.qa_actions_.size(); ++i) {
    const auto& s = space.qa_actions_[i];
    space.qa_index_.emplace(std::make_pair(s.kind, s.token), static_cast<int>(i));
  }
  return space;
}

int ActionSpace::size() const {
  return kind_ == TaskKind::math ? modulus_ : static_cast<int>(qa_actions_.size());
}

Step ActionSpace::to_step(int action, const Problem& problem, std::size_t index) const {
  if (action < 0 || action >= size()) {
    throw ContractViolation(fmt::format("action {} outside vocabulary of size {}", action, size()));
  }
  if (kind_ == TaskKind::qa) return qa_actions_[static_cast<std::size_t>(action)];
  const bool last = index + 1 >= problem.oracle_steps.size();
  return {last ? StepKind::answer : StepKind::reason, std::to_string(action)};
}

std::optional<int> ActionSpace::action_of(const Step& step) const {
  if (kind_ == TaskKind::qa) {
    auto it = qa_index_.find(std::make_pair(step.kind, step.token));
    if (it == qa_index_.end()) return std::nullopt;
    return it->second;
  }
  if (step.kind != StepKind::reason && step.kind != StepKind::answer) return std::nullopt;
  int value = -1;
  const auto* first = step.token.data();
  const auto* last = first + step.token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || value < 0 || value >= modulus_) return std::nullopt;
  return value;
}

std::vector<int> ActionSpace::actions_like(const Step& step) const {
  std::vector<int> out;
  if (kind_ == TaskKind::math) {
    out.resize(static_cast<std::size_t>(modulus_));
    for (int i = 0; i < modulus_; ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
  }
  for (std::size_t i = 0; i < qa_actions_.size(); ++i) {
    if (qa_actions_[i].kind == step.kind) out.push_back(static_cast<int>(i));
  }
  return out;
}

Environment Environment::math(int modulus) { return {ActionSpace::math(modulus), Corpus{}}; }

Environment Environment::qa(Corpus corpus) {
  auto actions = ActionSpace::qa(corpus);
  return {std::move(actions), std::move(corpus)};
}

// ---------------------------------------------------------------------------
// Generators

Problem generate_math_problem(std::uint64_t seed, int chain_len, int vocab_size) {
  if (chain_len < 1) throw ConfigError("math chain_len must be >= 1");
  if (vocab_size < 2) throw ConfigError("math vocab_size must be >= 2");
  Rng rng(seed);
  Problem p;
  p.id = fmt::format("math-s{}-c{}-v{}", seed, chain_len, vocab_size);
  p.kind = TaskKind::math;
  p.seed = seed;
  p.modulus = vocab_size;
  int running = 0;
  for (int k = 0; k < chain_len; ++k) {
    const int addend = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab_size)));
    running = (running + addend) % vocab_size;
    p.prompt.push_back(std::to_string(addend));
    p.gold_answer.push_back(std::to_string(running));
    const bool last = k + 1 == chain_len;
    p.oracle_steps.push_back({last ? StepKind::answer : StepKind::reason, std::to_string(running)});
  }
  return p;
}

Problem generate_qa_problem(std::uint64_t seed, const Corpus& corpus, int hops) {
  if (hops != 1 && hops != 2) throw ConfigError("qa hops must be 1 or 2");
  const auto& records = corpus.records();
  // Chains are enumerated in corpus order; the seed picks one of them.
  std::vector<std::pair<std::size_t, std::size_t>> chains;
  if (hops == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) chains.emplace_back(i, i);
  } else {
    std::map<std::string_view, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < records.size(); ++i) by_subject[records[i].subject].push_back(i);
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto it = by_subject.find(records[i].object);
      if (it == by_subject.end()) continue;
      for (std::size_t j : it->second) chains.emplace_back(i, j);
    }
  }
  if (chains.empty()) {
    throw GenerationError(fmt::format("corpus has no {}-hop chain", hops));
  }
  Rng rng(seed);
  const auto [first, second] = chains[rng.below(chains.size())];

  Problem p;
  p.id = fmt::format("qa-s{}-h{}", seed, hops);
  p.kind = TaskKind::qa;
  p.seed = seed;
  const Triple& a = records[first];
  p.prompt = {a.subject, a.relation};
  p.oracle_steps.push_back({StepKind::query, make_query_token(a.subject, a.relation)});
  p.oracle_steps.push_back({StepKind::reason, a.object});
  std::string final_object = a.object;
  if (hops == 2) {
    const Triple& b = records[second];
    p.prompt.push_back(b.relation);
    p.oracle_steps.push_back({StepKind::query, make_query_token(b.subject, b.relation)});
    p.oracle_steps.push_back({StepKind::reason, b.object});
    final_object = b.object;
  }
  p.oracle_steps.push_back({StepKind::answer, final_object});
  p.gold_answer = split_words(final_object);
  return p;
}

Step env_lookup(const Corpus& corpus, const Step& query) {
  if (query.kind != StepKind::query) {
    throw ContractViolation("env_lookup expects a query step");
  }
  const auto sep = query.token.find(kKeySeparator);
  if (sep == std::string::npos) return {StepKind::doc, std::string(kNoResult)};
  const std::string_view token(query.token);
  const auto hit = corpus.lookup(token.substr(0, sep), token.substr(sep + 1));
  return {StepKind::doc, hit ? std::string(*hit) : std::string(kNoResult)};
}

bool is_terminal(std::span<const Step> steps) {
  return !steps.empty() && steps.back().kind == StepKind::answer;
}

std::vector<std::string> extract_answer(const Problem& problem, std::span<const Step> steps) {
  if (!is_terminal(steps)) return {};
  if (problem.kind == TaskKind::qa) return split_words(steps.back().token);
  std::vector<std::string> values;
  for (const auto& s : steps) {
    if (s.kind != StepKind::doc) values.push_back(s.token);
  }
  return values;
}

namespace {

std::string tag(std::string_view prefix, std::string_view token) {
  std::string out(prefix);
  for (char c : token) out += (c == ' ' || c == '\t') ? '_' : c;
  return out;
}

std::string_view step_prefix(StepKind kind) {
  switch (kind) {
    case StepKind::reason: return "s:";
    case StepKind::query: return "q:";
    case StepKind::doc: return "d:";
    case StepKind::answer: return "a:";
  }
  return "?:";
}

}  // namespace

std::vector<std::string> visible_stream(const Problem& problem, std::span<const Step> history) {
  std::vector<std::string> stream;
  if (problem.kind == TaskKind::math) {
    std::size_t k = 0;
    for (const auto& s : history) {
      if (k < problem.prompt.size()) stream.push_back(tag("p:", problem.prompt[k]));
      stream.push_back(tag(step_prefix(s.kind), s.token));
      ++k;
    }
    if (k < problem.prompt.size()) stream.push_back(tag("p:", problem.prompt[k]));
    return stream;
  }
  for (const auto& t : problem.prompt) stream.push_back(tag("p:", t));
  for (const auto& s : history) stream.push_back(tag(step_prefix(s.kind), s.token));
  return stream;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace ovd
