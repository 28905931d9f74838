// usersim: run simulated search sessions, score runs, validate logs, audit with testers.
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "usersim/bench.hpp"
#include "usersim/error.hpp"
#include "usersim/measures.hpp"

namespace fs = std::filesystem;
using namespace usersim;

namespace {

std::string number(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed, std::optional<std::size_t> threads,
            const fs::path& out) {
  auto config = bench::load_config(config_path);
  if (seed) config.seed = *seed;
  if (threads) config.threads = std::max<std::size_t>(1, *threads);
  const auto data = bench::load_collection(config);
  const auto report = bench::run_sweep(config, data, out);
  std::cout << report.text();
  return 0;
}

// TREC run lines: topic Q0 doc rank score tag.
int cmd_metrics(const fs::path& qrels_path, const fs::path& run_path, std::size_t k, double p) {
  const auto qrels = parse_qrels(read_file(qrels_path.string()));
  struct Entry {
    long rank;
    double score;
    std::string doc;
  };
  std::map<std::pair<std::string, std::string>, std::vector<Entry>> runs;  // (tag, topic)
  std::istringstream in(read_file(run_path.string()));
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string topic, q0, doc, tag;
    long rank = 0;
    double score = 0.0;
    if (!(fields >> topic >> q0 >> doc >> rank >> score >> tag)) {
      throw ParseError("expected 'topic Q0 doc rank score tag'", ParseError::Where::Line, n);
    }
    runs[{tag, topic}].push_back({rank, score, doc});
  }
  measures::MetricParams params;
  params.k = k;
  params.p = p;
  const std::string ks = std::to_string(k);
  std::cout << "topic,system,user,run,metric,value\n";
  for (auto& [key, entries] : runs) {
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.rank != b.rank ? a.rank < b.rank : a.score > b.score;
    });
    measures::Ranking ranking;
    for (const auto& e : entries) ranking.push_back(qrels.grade(key.second, e.doc));
    measures::Ranking ideal;
    const auto judged = qrels.entries().find(key.second);
    if (judged != qrels.entries().end()) {
      for (const auto& [_, g] : judged->second) {
        if (g > 0) ideal.push_back(g);
      }
    }
    const std::vector<std::pair<std::string, double>> rows = {
        {"P@" + ks, measures::classic(measures::Classic::PrecisionAtK, ranking, params, ideal)},
        {"AP", measures::classic(measures::Classic::AveragePrecision, ranking, params, ideal)},
        {"NDCG@" + ks, measures::classic(measures::Classic::NdcgAtK, ranking, params, ideal)},
        {"RBP", measures::rbp(ranking, p, params.g_max)},
        {"ERR", measures::err(ranking, params.g_max)},
    };
    for (const auto& [metric, value] : rows) {
      std::cout << key.second << ',' << key.first << ",none,0," << metric << ',' << number(value) << '\n';
    }
  }
  return 0;
}

int cmd_validate(const fs::path& logs, const fs::path& reference_path, double threshold) {
  const auto reference = bench::parse_reference(read_file(reference_path.string()));
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(logs)) {
    if (entry.is_regular_file() && entry.path().extension() == ".log") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .log files under " + logs.string());
  const QrelsTable none;
  std::vector<session::SessionSummary> sessions;
  for (const auto& f : files) sessions.push_back(session::log_summary(session::parse_log(read_file(f.string())), none));
  bool flagged = false;
  std::cout << "sessions " << sessions.size() << '\n';
  for (const auto& d : bench::compare_behavior_stats(sessions, reference, threshold)) {
    std::cout << d.statistic << " js " << number(d.value) << (d.flagged ? " FLAGGED" : "") << '\n';
    flagged = flagged || d.flagged;
  }
  return flagged ? 3 : 0;
}

int cmd_test(const fs::path& config_path, const fs::path& testers_path, const std::string& only_user) {
  const auto config = bench::load_config(config_path);
  const auto testers = bench::parse_testers(read_file(testers_path.string()));
  const auto data = bench::load_collection(config);
  bool any = false;
  for (const auto& user : config.users) {
    if (!only_user.empty() && user.name != only_user) continue;
    any = true;
    const auto result = bench::tester_pass_rate(user, testers, config, data);
    std::cout << "user " << user.name << " pass rate " << number(result.rate) << '\n';
    for (const auto& v : result.verdicts) {
      std::cout << "  " << v.name << ' ' << (v.pass ? "pass" : "fail") << " mean_a " << number(v.mean_a)
                << " mean_b " << number(v.mean_b) << " wins " << v.wins << " losses " << v.losses << " p "
                << number(v.p_value) << '\n';
    }
  }
  if (!any) throw ConfigError("no user named '" + only_user + "'");
  return 0;
}

int cmd_synth(const fs::path& out, const bench::SynthSpec& spec) {
  const auto data = bench::synthetic_collection(spec);
  fs::create_directories(out);
  write_text(out / "docs.tsv", serialize_documents(data.index->collection().documents()));
  write_text(out / "topics.txt", serialize_trec_topics(data.topics));
  write_text(out / "qrels.txt", serialize_qrels(data.qrels));
  std::cout << data.index->collection().size() << " documents, " << data.topics.size() << " topics\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated users for interactive retrieval evaluation"};
  app.require_subcommand(1);

  fs::path config, out, qrels, ranking, logs, reference, testers;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::size_t k = 10;
  double p = 0.8;
  double threshold = 0.05;
  std::string user;
  bench::SynthSpec synth;

  auto* run = app.add_subcommand("run", "run every (user, topic, system, run) cell of a config");
  run->add_option("--config", config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the config's global seed");
  run->add_option("--threads", threads, "worker threads");
  run->add_option("--out", out, "output directory")->required();

  auto* metrics = app.add_subcommand("metrics", "score a TREC run file against qrels");
  metrics->add_option("--qrels", qrels)->required()->check(CLI::ExistingFile);
  metrics->add_option("--ranking", ranking, "TREC run file")->required()->check(CLI::ExistingFile);
  metrics->add_option("--k", k, "cutoff for P@k and NDCG@k")->check(CLI::PositiveNumber);
  metrics->add_option("--p", p, "RBP persistence")->check(CLI::Range(0.0, 1.0));

  auto* validate = app.add_subcommand("validate", "compare session logs with reference statistics");
  validate->add_option("--logs", logs, "directory searched for .log files")->required()->check(CLI::ExistingDirectory);
  validate->add_option("--reference", reference, "reference pmfs (JSON)")->required()->check(CLI::ExistingFile);
  validate->add_option("--threshold", threshold, "flag divergences above this");

  auto* test = app.add_subcommand("test", "score testers for each configured user");
  test->add_option("--config", config)->required()->check(CLI::ExistingFile);
  test->add_option("--testers", testers, "tester definitions (INI)")->required()->check(CLI::ExistingFile);
  test->add_option("--user", user, "only this user");

  auto* gen = app.add_subcommand("synth", "write a synthetic test collection");
  gen->add_option("--out", out)->required();
  gen->add_option("--topics", synth.topics);
  gen->add_option("--relevant", synth.relevant_per_topic);
  gen->add_option("--noise", synth.noise_docs);
  gen->add_option("--seed", synth.seed);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, seed, threads, out);
    if (*metrics) return cmd_metrics(qrels, ranking, k, p);
    if (*validate) return cmd_validate(logs, reference, threshold);
    if (*test) return cmd_test(config, testers, user);
    if (*gen) return cmd_synth(out, synth);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
