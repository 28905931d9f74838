#include <algorithm>
#include <cstdio>
#include <numeric>

#include "usersim/bench.hpp"
#include "usersim/error.hpp"

namespace usersim::bench {

namespace {

std::size_t pick(Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

TestCollection synthetic_collection(const SynthSpec& spec) {
  if (spec.topics == 0 || spec.topic_vocabulary < 4 || spec.background_vocabulary == 0 || spec.doc_length == 0) {
    throw ConfigError("synthetic collection needs topics, a topic vocabulary of >= 4 terms and a background");
  }
  if (!(spec.topic_share >= 0.0 && spec.topic_share <= 1.0)) throw ConfigError("topic_share outside [0,1]");
  Rng rng(spec.seed);
  auto topic_term = [](std::size_t t, std::size_t j) { return numbered("t", t, 3) + numbered("w", j, 2); };
  auto background = [&] { return numbered("bg", pick(rng, spec.background_vocabulary), 4); };

  const std::size_t n_docs = spec.topics * spec.relevant_per_topic + spec.noise_docs;
  std::vector<std::size_t> slot(n_docs);
  std::iota(slot.begin(), slot.end(), 0);
  std::shuffle(slot.begin(), slot.end(), rng);  // ids carry no relevance signal

  TestCollection data;
  std::vector<Document> docs(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) {
    const bool relevant = i < spec.topics * spec.relevant_per_topic;
    const std::size_t t = relevant ? i / spec.relevant_per_topic : 0;
    Document& d = docs[slot[i]];
    d.id = numbered("d", slot[i], 5);
    auto token = [&] {
      return relevant && uniform01(rng) < spec.topic_share ? topic_term(t, pick(rng, spec.topic_vocabulary))
                                                           : background();
    };
    for (int k = 0; k < 3; ++k) d.title.push_back(token());
    for (std::size_t k = 0; k < spec.doc_length; ++k) d.body.push_back(token());
    if (relevant) {
      const int grade = 1 + static_cast<int>(i % spec.relevant_per_topic % 3);
      data.qrels.set(numbered("T", t, 3), d.id, grade);
    }
  }
  for (std::size_t t = 0; t < spec.topics; ++t) {
    Topic topic;
    topic.id = numbered("T", t, 3);
    for (std::size_t j = 0; j < 2; ++j) topic.title.push_back(topic_term(t, j));
    for (std::size_t j = 0; j < 6 && j < spec.topic_vocabulary; ++j) topic.description.push_back(topic_term(t, j));
    data.topics.push_back(std::move(topic));
  }
  data.index = std::make_shared<engine::Index>(engine::build_index(std::move(docs)));
  return data;
}

}  // namespace usersim::bench
