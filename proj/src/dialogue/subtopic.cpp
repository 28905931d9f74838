#include <cmath>

#include "usersim/dialogue.hpp"
#include "usersim/error.hpp"

namespace usersim::dialogue {

TransitionTable::TransitionTable(Eigen::MatrixXd c, std::vector<std::vector<std::string>> queries)
    : rel_(std::move(c)), queries_(std::move(queries)) {
  check(rel_);
  nonrel_ = rel_;
}

TransitionTable::TransitionTable(Eigen::MatrixXd rel, Eigen::MatrixXd nonrel,
                                 std::vector<std::vector<std::string>> queries)
    : rel_(std::move(rel)), nonrel_(std::move(nonrel)), dependent_(true), queries_(std::move(queries)) {
  check(rel_);
  check(nonrel_);
  if (rel_.rows() != nonrel_.rows()) throw ConfigError("relevance-conditioned matrices differ in size");
  if ((rel_.row(0) - nonrel_.row(0)).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("relevance-conditioned matrices must share the start row");
  }
}

void TransitionTable::check(const Eigen::MatrixXd& m) const {
  if (m.rows() < 2 || m.rows() != m.cols()) throw ConfigError("transition matrix must be square with at least 2 states");
  if ((m.array() < 0.0).any()) throw ConfigError("transition probabilities must be non-negative");
  const Eigen::VectorXd sums = m.rowwise().sum();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(sums(i) - 1.0) > 1e-9) {
      throw ConfigError("transition row " + std::to_string(i) + " sums to " + std::to_string(sums(i)));
    }
  }
  if (m.col(0).cwiseAbs().maxCoeff() > 0.0) throw ConfigError("no transition may enter the start state");
  const auto last = m.rows() - 1;
  if (m(last, last) != 1.0) throw ConfigError("end state must be absorbing");
  if (!queries_.empty() && queries_.size() != static_cast<std::size_t>(m.rows()) - 2) {
    throw ConfigError("need one query set per subtopic");
  }
}

const std::vector<std::string>& TransitionTable::queries(std::size_t subtopic) const {
  if (subtopic < 1 || subtopic > subtopics() || queries_.empty()) {
    throw ContractViolation("no query set for state " + std::to_string(subtopic));
  }
  return queries_[subtopic - 1];
}

std::size_t subtopic_step(const TransitionTable& table, std::size_t state, std::optional<bool> relevance, Rng& rng) {
  if (state > table.end()) throw ContractViolation("state " + std::to_string(state) + " not in the table");
  if (state == table.end()) return state;
  if (table.relevance_dependent() && state != table.start() && !relevance) {
    throw ContractViolation("relevance-dependent transitions need the answer's relevance");
  }
  const auto& m = table.matrix(relevance.value_or(true));
  const auto row = static_cast<Eigen::Index>(state);
  const double u = uniform01(rng);
  double acc = 0.0;
  Eigen::Index last_positive = row;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(row, j) <= 0.0) continue;
    acc += m(row, j);
    last_positive = j;
    if (u < acc) return static_cast<std::size_t>(j);
  }
  return static_cast<std::size_t>(last_positive);  // rounding in the row sum
}

Eigen::MatrixXd estimate_transitions(const std::vector<std::vector<std::size_t>>& paths, std::size_t subtopics) {
  const auto n = static_cast<Eigen::Index>(subtopics + 2);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : paths) {
    for (std::size_t t = 1; t < p.size(); ++t) {
      if (p[t - 1] >= static_cast<std::size_t>(n) || p[t] >= static_cast<std::size_t>(n)) {
        throw ContractViolation("path state outside the table");
      }
      counts(static_cast<Eigen::Index>(p[t - 1]), static_cast<Eigen::Index>(p[t])) += 1.0;
    }
  }
  counts.row(n - 1).setZero();
  counts(n - 1, n - 1) = 1.0;
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    const double s = counts.row(i).sum();
    if (s > 0.0) {
      counts.row(i) /= s;
    } else {
      counts(i, n - 1) = 1.0;
    }
  }
  return counts;
}

bool continue_querying(const PersistenceParams& params, std::size_t turn, bool previous_relevant, Rng& rng) {
  if (turn == 0) throw ContractViolation("turns are counted from 1");
  for (double p : {params.leave_if_relevant, params.leave_if_nonrelevant}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("leave probabilities must lie in [0,1]");
  }
  if (turn == 1) return true;
  return !bernoulli(rng, previous_relevant ? params.leave_if_relevant : params.leave_if_nonrelevant);
}

ConversationLog run_conversation(const TransitionTable& table, const PersistenceParams& persistence,
                                 const AnswerFn& answer, std::size_t max_turns, Rng& rng) {
  ConversationLog log;
  std::size_t state = table.start();
  log.path.push_back(state);
  state = subtopic_step(table, state, std::nullopt, rng);
  log.path.push_back(state);
  for (std::size_t turn = 1;; ++turn) {
    if (state == table.end()) {
      log.end_reason = "end_state";
      break;
    }
    if (turn > max_turns) {
      log.end_reason = "max_turns";
      break;
    }
    std::string query;
    if (table.has_queries()) {
      const auto& qs = table.queries(state);
      if (qs.empty()) throw ConfigError("subtopic " + std::to_string(state) + " has no queries");
      query = qs[std::min(qs.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(qs.size())))];
    }
    const bool relevant = answer ? answer(state, query, rng) : true;
    log.turns.push_back({state, query, relevant});
    if (!continue_querying(persistence, turn + 1, relevant, rng)) {
      log.end_reason = "persistence";
      break;
    }
    state = subtopic_step(table, state, relevant, rng);
    log.path.push_back(state);
  }
  return log;
}

}  // namespace usersim::dialogue
