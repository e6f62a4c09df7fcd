#include "fcm/synthgen.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <tuple>

#include "fcm/error.hpp"
#include "fcm/random.hpp"

namespace fcm::synthgen {

namespace {

std::string padded(std::size_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", std::min(width, 24), value);
  return buf;
}

int digits(std::size_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

void check_spec(const PlantedSpec& spec) {
  if (spec.n_topics < 1) throw SpecInfeasible("n_topics must be >= 1");
  if (spec.terms_per_topic < 1) throw SpecInfeasible("terms_per_topic must be >= 1");
  if (spec.docs < 1) throw SpecInfeasible("docs must be >= 1");
  if (spec.doc_length_min < 1 || spec.doc_length_min > spec.doc_length_max)
    throw SpecInfeasible("doc_length must satisfy 1 <= min <= max");
  if (!(spec.topic_weight > 0.0 && spec.topic_weight <= 1.0)) throw SpecInfeasible("topic_weight must lie in (0, 1]");
  if (spec.background_terms == 0 && spec.topic_weight < 1.0)
    throw SpecInfeasible("background draws requested but background vocabulary is empty");
  if (spec.component_tag.empty()) throw SpecInfeasible("component_tag must be non-empty");
}

}  // namespace

Generated generate_corpus(const PlantedSpec& spec) {
  check_spec(spec);
  Rng rng(spec.seed);
  Generated out;
  out.records.source_label = "synthetic:" + spec.component_tag;

  const int tw = digits(spec.terms_per_topic - 1);
  out.truth.topic_terms.resize(spec.n_topics);
  for (std::size_t t = 0; t < spec.n_topics; ++t)
    for (std::size_t i = 0; i < spec.terms_per_topic; ++i)
      out.truth.topic_terms[t].push_back(spec.term_prefix + "t" + std::to_string(t) + "w" + padded(i, tw));
  std::vector<std::string> background;
  const int bw = digits(spec.background_terms > 0 ? spec.background_terms - 1 : 0);
  for (std::size_t i = 0; i < spec.background_terms; ++i)
    background.push_back(spec.term_prefix + "bg" + padded(i, bw));

  std::vector<std::size_t> topic_of(spec.docs);
  for (std::size_t i = 0; i < spec.docs; ++i) topic_of[i] = i % spec.n_topics;
  rng.shuffle(topic_of);

  const int iw = std::max(4, digits(spec.docs));
  const std::size_t span = spec.doc_length_max - spec.doc_length_min + 1;
  for (std::size_t i = 0; i < spec.docs; ++i) {
    const auto& topic = out.truth.topic_terms[topic_of[i]];
    const std::size_t len = spec.doc_length_min + static_cast<std::size_t>(rng.below(span));
    std::string text;
    for (std::size_t n = 0; n < len; ++n) {
      const double u = rng.uniform();
      const std::string& term = u < spec.topic_weight
                                    ? topic[rng.below(topic.size())]
                                    : background[rng.below(background.size())];
      if (n) text.push_back(' ');
      text += term;
    }
    corpus::FailureRecord rec;
    rec.record_id = spec.component_tag + "-" + padded(i + 1, iw);
    rec.component = spec.component_tag;
    rec.description = std::move(text);
    out.truth.topic_of_doc[rec.record_id] = topic_of[i];
    out.records.records.push_back(std::move(rec));
  }
  return out;
}

RecoveryReport score_recovery(const std::vector<std::vector<std::string>>& concept_terms,
                              const GroundTruth& truth, std::size_t top_n) {
  if (top_n < 1) throw Error(ErrorKind::usage, "InvalidTopN", "top_n must be >= 1");
  const std::size_t n_topics = truth.topic_terms.size();
  const std::size_t n_concepts = concept_terms.size();
  if (n_topics > n_concepts) throw MoreTopicsThanConcepts(n_topics, n_concepts);

  std::vector<std::set<std::string>> topic_sets;
  for (const auto& terms : truth.topic_terms) topic_sets.emplace_back(terms.begin(), terms.end());

  // (overlap, topic, concept), best first; ties resolve to the lower indices.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < n_topics; ++t) {
    for (std::size_t c = 0; c < n_concepts; ++c) {
      std::size_t overlap = 0;
      const auto& terms = concept_terms[c];
      for (std::size_t i = 0; i < std::min(top_n, terms.size()); ++i) overlap += topic_sets[t].count(terms[i]);
      pairs.emplace_back(overlap, t, c);
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });

  RecoveryReport report;
  report.top_n = top_n;
  report.assignment.assign(n_topics, 0);
  report.overlap.assign(n_topics, 0);
  report.precision_at_n.assign(n_topics, 0.0);
  std::vector<bool> topic_done(n_topics, false), concept_used(n_concepts, false);
  for (const auto& [overlap, t, c] : pairs) {
    if (topic_done[t] || concept_used[c]) continue;
    topic_done[t] = concept_used[c] = true;
    report.assignment[t] = c;
    report.overlap[t] = overlap;
    report.precision_at_n[t] = static_cast<double>(overlap) / static_cast<double>(top_n);
  }
  if (n_topics > 0)
    report.mean_precision =
        std::accumulate(report.precision_at_n.begin(), report.precision_at_n.end(), 0.0) / static_cast<double>(n_topics);
  return report;
}

RecoveryReport score_recovery(const concepts::ConceptModel& model, const GroundTruth& truth, std::size_t top_n) {
  std::vector<std::vector<std::string>> lists;
  for (std::size_t c = 0; c < model.k; ++c) {
    std::vector<std::string> terms;
    for (const auto& l : concepts::top_terms(model, c, top_n)) terms.push_back(l.key);
    lists.push_back(std::move(terms));
  }
  return score_recovery(lists, truth, top_n);
}

std::vector<double> document_purity(const concepts::ConceptModel& model, const GroundTruth& truth,
                                    const RecoveryReport& report, std::size_t top_docs) {
  std::vector<double> out;
  for (std::size_t t = 0; t < report.assignment.size(); ++t) {
    const auto docs = concepts::top_documents(model, report.assignment[t], top_docs);
    std::size_t hits = 0;
    for (const auto& d : docs) {
      auto it = truth.topic_of_doc.find(d.key);
      if (it != truth.topic_of_doc.end() && it->second == t) ++hits;
    }
    out.push_back(docs.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(docs.size()));
  }
  return out;
}

const std::vector<ComponentPlan>& fleet_components() {
  static const std::vector<ComponentPlan> plan{
      {"annular", 247, 2778.0, 4},
      {"shear_ram", 310, 1706.0, 4},
      {"regulator", 421, 1121.0, 5},
      {"ccsv", 334, 960.0, 3},
  };
  return plan;
}

namespace {

// Splits an integer total into n non-negative integers by largest remainder.
std::vector<double> split_total(double total, std::size_t n, Rng& rng) {
  std::vector<double> weights(n);
  for (auto& w : weights) w = 0.05 + rng.uniform();
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  const auto whole = static_cast<long long>(std::llround(total));
  std::vector<long long> parts(n);
  std::vector<std::pair<double, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = static_cast<double>(whole) * weights[i] / sum;
    parts[i] = static_cast<long long>(std::floor(exact));
    assigned += parts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long long r = 0; r < whole - assigned; ++r) ++parts[remainders[static_cast<std::size_t>(r) % n].second];
  return {parts.begin(), parts.end()};
}

std::string random_date(Rng& rng) {
  using namespace std::chrono;
  const sys_days first = year{2012} / January / 1;
  const sys_days last = year{2018} / November / 30;
  const auto span = static_cast<std::uint64_t>((last - first).count() + 1);
  const year_month_day ymd{first + days{static_cast<int>(rng.below(span))}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

FleetCorpus generate_fleet_corpus(std::uint64_t seed) {
  FleetCorpus out;
  out.records.source_label = "synthetic:fleet";
  Rng rng(seed);
  std::uint64_t component_seed = seed;
  for (const auto& plan : fleet_components()) {
    PlantedSpec spec;
    spec.n_topics = plan.topics;
    spec.docs = plan.records;
    spec.component_tag = plan.tag;
    spec.seed = ++component_seed;
    spec.term_prefix = concepts::concept_name(plan.tag, 1);
    spec.term_prefix.pop_back();  // drop the ordinal, keep the abbreviation
    for (auto& ch : spec.term_prefix) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto generated = generate_corpus(spec);
    const auto hours = split_total(plan.downtime_hours, plan.records, rng);
    for (std::size_t i = 0; i < generated.records.size(); ++i) {
      auto& rec = generated.records.records[i];
      rec.downtime_hours = hours[i];
      rec.event_date = random_date(rng);
      out.records.records.push_back(std::move(rec));
    }
    out.truth.emplace(plan.tag, std::move(generated.truth));
  }
  rng.shuffle(out.records.records);
  return out;
}

nlohmann::ordered_json to_json(const GroundTruth& truth) {
  nlohmann::ordered_json j;
  j["topic_terms"] = truth.topic_terms;
  nlohmann::ordered_json docs = nlohmann::ordered_json::object();
  for (const auto& [id, t] : truth.topic_of_doc) docs[id] = t;
  j["topic_of_doc"] = std::move(docs);
  return j;
}

GroundTruth truth_from_json(const nlohmann::json& j) {
  GroundTruth truth;
  truth.topic_terms = j.at("topic_terms").get<std::vector<std::vector<std::string>>>();
  for (const auto& [id, t] : j.at("topic_of_doc").items()) truth.topic_of_doc[id] = t.get<std::size_t>();
  return truth;
}

nlohmann::ordered_json to_json(const RecoveryReport& report) {
  return {{"top_n", report.top_n},
          {"assignment", report.assignment},
          {"overlap", report.overlap},
          {"precision_at_n", report.precision_at_n},
          {"mean_precision", report.mean_precision}};
}

}  // namespace fcm::synthgen
