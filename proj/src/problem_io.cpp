#include "ovd/problem_io.hpp"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "ovd/error.hpp"

namespace ovd {

using nlohmann::json;

void SuiteConfig::validate() const {
  if (pool_size < 1) throw ConfigError("task.pool_size must be >= 1");
  if (kind == TaskKind::math) {
    if (chain_len < 1) throw ConfigError("task.chain_len must be >= 1");
    if (vocab_size < 2) throw ConfigError("task.vocab_size must be >= 2");
  } else if (hops != 1 && hops != 2) {
    throw ConfigError("task.hops must be 1 or 2");
  }
}

TaskSuite build_suite(const SuiteConfig& cfg) {
  cfg.validate();
  if (cfg.kind == TaskKind::math) {
    TaskSuite suite{Environment::math(cfg.vocab_size), {}};
    for (int i = 0; i < cfg.pool_size; ++i) {
      suite.problems.push_back(generate_math_problem(cfg.pool_seed + static_cast<std::uint64_t>(i),
                                                     cfg.chain_len, cfg.vocab_size));
    }
    return suite;
  }
  Corpus corpus = cfg.corpus_path.empty()
                      ? synthetic_corpus(cfg.corpus_seed, cfg.corpus_entities, cfg.corpus_relations)
                      : load_corpus(cfg.corpus_path);
  std::vector<Problem> problems;
  for (int i = 0; i < cfg.pool_size; ++i) {
    problems.push_back(
        generate_qa_problem(cfg.pool_seed + static_cast<std::uint64_t>(i), corpus, cfg.hops));
  }
  return {Environment::qa(std::move(corpus)), std::move(problems)};
}

namespace {

json problem_to_json(const Problem& p) {
  json steps = json::array();
  for (const auto& s : p.oracle_steps) steps.push_back({to_string(s.kind), s.token});
  return {{"kind", to_string(p.kind)}, {"prompt", p.prompt},   {"gold_answer", p.gold_answer},
          {"oracle_steps", steps},     {"seed", p.seed},       {"modulus", p.modulus}};
}

Problem problem_from_json(const std::string& id, const json& j) {
  Problem p;
  p.id = id;
  p.kind = parse_task_kind(j.at("kind").get<std::string>());
  p.prompt = j.at("prompt").get<std::vector<std::string>>();
  p.gold_answer = j.at("gold_answer").get<std::vector<std::string>>();
  for (const auto& s : j.at("oracle_steps")) {
    p.oracle_steps.push_back(
        {parse_step_kind(s.at(0).get<std::string>()), s.at(1).get<std::string>()});
  }
  p.seed = j.at("seed").get<std::uint64_t>();
  p.modulus = j.at("modulus").get<int>();
  if (p.oracle_steps.empty()) throw ConfigError(fmt::format("problem {} has no oracle steps", id));
  return p;
}

}  // namespace

void write_problem_set(std::ostream& out, const TaskSuite& suite) {
  json doc;
  doc["schema"] = kProblemSchema;
  doc["kind"] = to_string(suite.env.kind());
  if (suite.env.kind() == TaskKind::qa) {
    json records = json::array();
    for (const auto& r : suite.env.corpus().records()) {
      records.push_back({r.subject, r.relation, r.object});
    }
    doc["corpus"] = records;
  }
  json problems = json::object();
  for (const auto& p : suite.problems) {
    if (problems.contains(p.id)) {
      throw ContractViolation(fmt::format("duplicate problem id '{}'", p.id));
    }
    problems[p.id] = problem_to_json(p);
  }
  doc["problems"] = problems;
  out << doc.dump(2) << '\n';
}

TaskSuite read_problem_set(std::istream& in, const std::string& source_name) {
  try {
    const json doc = json::parse(in);
    if (doc.at("schema").get<std::string>() != kProblemSchema) {
      throw ConfigError(fmt::format("{}: unsupported problem-set schema '{}'", source_name,
                                    doc.at("schema").get<std::string>()));
    }
    const auto kind = parse_task_kind(doc.at("kind").get<std::string>());
    std::vector<Problem> problems;
    int modulus = 0;
    for (const auto& [id, pj] : doc.at("problems").items()) {
      problems.push_back(problem_from_json(id, pj));
      if (problems.back().kind != kind) {
        throw ConfigError(fmt::format("{}: problem {} has kind {}, file kind is {}", source_name,
                                      id, to_string(problems.back().kind), to_string(kind)));
      }
      modulus = problems.back().modulus;
    }
    if (problems.empty()) throw ConfigError(fmt::format("{}: problem set is empty", source_name));
    if (kind == TaskKind::math) {
      for (const auto& p : problems) {
        if (p.modulus != modulus) {
          throw ConfigError(fmt::format("{}: mixed math moduli in one problem set", source_name));
        }
      }
      return {Environment::math(modulus), std::move(problems)};
    }
    Corpus corpus;
    for (const auto& r : doc.at("corpus")) {
      corpus.add({r.at(0).get<std::string>(), r.at(1).get<std::string>(),
                  r.at(2).get<std::string>()});
    }
    return {Environment::qa(std::move(corpus)), std::move(problems)};
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: malformed problem set: {}", source_name, e.what()));
  }
}

void save_problem_set(const std::string& path, const TaskSuite& suite) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write problem set '{}'", path));
  write_problem_set(out, suite);
  if (!out) throw IoError(fmt::format("failed writing problem set '{}'", path));
}

TaskSuite load_problem_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open problem set '{}'", path));
  return read_problem_set(in, path);
}

}  // namespace ovd
