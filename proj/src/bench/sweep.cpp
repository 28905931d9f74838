#include <charconv>
#include <fstream>
#include <sstream>

#include "usersim/bench.hpp"
#include "usersim/detail/parallel.hpp"
#include "usersim/error.hpp"

namespace usersim::bench {

namespace {

std::string number(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// Keeps file names portable whatever the topic or profile is called.
std::string file_safe(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '.' || c == '_';
    if (!ok) c = '_';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out.flush()) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t global, const CellKey& key) {
  const auto run = std::to_string(key.run);
  return derive_seed(global, {"cell", key.user, key.topic, key.system, run});
}

std::string Report::csv() const {
  std::string out = "topic,system,user,run,metric,value\n";
  for (const auto& c : cells) {
    for (const auto& [metric, value] : c.metrics) {
      out += c.key.topic + ',' + c.key.system + ',' + c.key.user + ',' + std::to_string(c.key.run) + ',' + metric +
             ',' + number(value) + '\n';
    }
  }
  return out;
}

std::string Report::text() const {
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::pair<double, std::size_t>>> sums;
  for (const auto& c : cells) {
    auto& row = sums[{c.key.system, c.key.user}];
    for (const auto& [metric, value] : c.metrics) {
      row[metric].first += value;
      row[metric].second += 1;
    }
  }
  std::ostringstream out;
  out << "cells: " << cells.size() << '\n';
  for (const auto& [key, row] : sums) {
    out << "system " << key.first << ", user " << key.second << '\n';
    for (const auto& [metric, acc] : row) {
      out << "  " << metric << " mean " << number(acc.first / static_cast<double>(acc.second)) << " over "
          << acc.second << '\n';
    }
  }
  for (const auto& t : testers) {
    out << "tester " << t.name << ": " << (t.pass ? "pass" : "fail") << " (A " << number(t.mean_a) << ", B "
        << number(t.mean_b) << ", wins " << t.wins << ", losses " << t.losses << ", p " << number(t.p_value)
        << ")\n";
  }
  for (const auto& [stat, value] : divergences) out << "divergence " << stat << ' ' << number(value) << '\n';
  return out.str();
}

Report run_sweep(const ExperimentConfig& config, const TestCollection& data,
                 const std::optional<std::filesystem::path>& out_dir) {
  if (config.runs == 0) throw ConfigError("runs must be >= 1");
  if (!data.index) throw ContractViolation("sweep needs an indexed collection");
  for (const auto& m : config.metrics) {
    if (!known_metric(m)) throw ConfigError("unknown metric '" + m + "'");
  }
  std::vector<const Topic*> topics;
  if (config.topic_ids.empty()) {
    for (const auto& t : data.topics) topics.push_back(&t);
  } else {
    for (const auto& id : config.topic_ids) topics.push_back(&data.topic(id));
  }

  struct Job {
    CellKey key;
    const session::UserProfile* user;
    const SystemConfig* system;
    const Topic* topic;
  };
  std::vector<Job> jobs;
  for (const auto& u : config.users) {
    for (const auto* t : topics) {
      for (const auto& s : config.systems) {
        for (std::size_t r = 0; r < config.runs; ++r) jobs.push_back({{t->id, s.name, u.name, r}, &u, &s, t});
      }
    }
  }
  std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.key < b.key; });
  for (std::size_t i = 1; i < jobs.size(); ++i) {
    if (jobs[i - 1].key == jobs[i].key) throw ConfigError("duplicate cell; user, system and topic names must be unique");
  }

  const bool logs = out_dir.has_value() && config.write_logs;
  if (out_dir) std::filesystem::create_directories(*out_dir / (logs ? "logs" : ""));

  Report report;
  report.cells.resize(jobs.size());
  detail::parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const session::SystemUnderTest sut{data.index.get(), job.system->scorer, job.system->k, job.system->name};
    Rng rng(cell_seed(config.seed, job.key));
    const auto log = session::run_session(*job.user, *job.topic, sut, data.qrels, config.budget, rng);
    CellResult& cell = report.cells[i];
    cell.key = job.key;
    for (const auto& m : config.metrics) cell.metrics[m] = log_metric(m, log, data.qrels, config.metric_params);
    cell.summary = session::log_summary(log, data.qrels);
    if (logs) {
      cell.log_file = "logs/" + file_safe(job.key.topic) + "__" + file_safe(job.key.system) + "__" +
                      file_safe(job.key.user) + "__" + std::to_string(job.key.run) + ".log";
      write_file(*out_dir / cell.log_file, session::serialize_log(log));
    }
  });

  if (out_dir) {
    write_file(*out_dir / "results.csv", report.csv());
    write_file(*out_dir / "report.txt", report.text());
  }
  return report;
}

}  // namespace usersim::bench
