#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "fcm/error.hpp"
#include "fcm/synthgen.hpp"
#include "planted_pipeline.hpp"

using namespace fcm;
using namespace fcm::synthgen;

namespace {

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

using Lists = std::vector<std::vector<std::string>>;

}  // namespace

TEST(Generate, ShapeAndTopicBalance) {
  PlantedSpec spec;
  spec.docs = 400;
  const auto g = generate_corpus(spec);
  ASSERT_EQ(g.records.size(), 400u);
  ASSERT_EQ(g.truth.topic_terms.size(), 4u);
  std::vector<std::size_t> per_topic(4, 0);
  for (const auto& r : g.records.records) {
    EXPECT_EQ(r.component, "annular");
    const auto n = words(r.description).size();
    EXPECT_GE(n, spec.doc_length_min);
    EXPECT_LE(n, spec.doc_length_max);
    ++per_topic.at(g.truth.topic_of_doc.at(r.record_id));
  }
  EXPECT_EQ(per_topic, (std::vector<std::size_t>{100, 100, 100, 100}));

  std::set<std::string> all;
  for (const auto& t : g.truth.topic_terms) {
    EXPECT_EQ(t.size(), spec.terms_per_topic);
    all.insert(t.begin(), t.end());
  }
  EXPECT_EQ(all.size(), 4 * spec.terms_per_topic);  // disjoint
}

TEST(Generate, SameSeedIdenticalDifferentSeedNot) {
  PlantedSpec spec;
  const auto a = generate_corpus(spec), b = generate_corpus(spec);
  EXPECT_EQ(corpus::to_jsonl(a.records), corpus::to_jsonl(b.records));
  EXPECT_EQ(to_json(a.truth), to_json(b.truth));
  spec.seed = 43;
  EXPECT_NE(corpus::to_jsonl(generate_corpus(spec).records), corpus::to_jsonl(a.records));
}

TEST(Generate, FullWeightUsesOnlyTopicTerms) {
  PlantedSpec spec;
  spec.topic_weight = 1.0;
  spec.docs = 60;
  const auto g = generate_corpus(spec);
  for (const auto& r : g.records.records) {
    const auto& topic = g.truth.topic_terms[g.truth.topic_of_doc.at(r.record_id)];
    const std::set<std::string> allowed(topic.begin(), topic.end());
    for (const auto& w : words(r.description)) EXPECT_TRUE(allowed.count(w)) << w;
  }
}

TEST(Generate, InfeasibleSpecs) {
  auto bad = [](auto mutate) {
    PlantedSpec s;
    mutate(s);
    return s;
  };
  EXPECT_THROW(generate_corpus(bad([](PlantedSpec& s) { s.n_topics = 0; })), SpecInfeasible);
  EXPECT_THROW(generate_corpus(bad([](PlantedSpec& s) { s.docs = 0; })), SpecInfeasible);
  EXPECT_THROW(generate_corpus(bad([](PlantedSpec& s) { s.doc_length_min = 70; })), SpecInfeasible);
  EXPECT_THROW(generate_corpus(bad([](PlantedSpec& s) { s.topic_weight = 0.0; })), SpecInfeasible);
  EXPECT_THROW(generate_corpus(bad([](PlantedSpec& s) { s.topic_weight = 1.5; })), SpecInfeasible);
  EXPECT_THROW(generate_corpus(bad([](PlantedSpec& s) { s.background_terms = 0; })), SpecInfeasible);
  EXPECT_NO_THROW(generate_corpus(bad([](PlantedSpec& s) {
    s.background_terms = 0;
    s.topic_weight = 1.0;
  })));
}

TEST(ScoreRecovery, PerfectAndZero) {
  GroundTruth truth;
  truth.topic_terms = {{"a", "b"}, {"c", "d"}};
  auto perfect = score_recovery(Lists{{"c", "d"}, {"a", "b"}, {"x", "y"}}, truth, 2);
  EXPECT_EQ(perfect.mean_precision, 1.0);
  EXPECT_EQ(perfect.assignment, (std::vector<std::size_t>{1, 0}));

  auto none = score_recovery(Lists{{"x", "y"}, {"z", "w"}}, truth, 2);
  EXPECT_EQ(none.mean_precision, 0.0);
  EXPECT_NE(none.assignment[0], none.assignment[1]);

  // A concept can serve only one topic.
  auto shared = score_recovery(Lists{{"a", "c"}, {"x", "y"}}, truth, 2);
  EXPECT_NE(shared.assignment[0], shared.assignment[1]);
  EXPECT_EQ(shared.mean_precision, 0.25);

  EXPECT_THROW(score_recovery(Lists{{"a", "b"}}, truth, 2), MoreTopicsThanConcepts);
}

TEST(ScoreRecovery, TruthJsonRoundTrip) {
  const auto g = generate_corpus(PlantedSpec{});
  const auto back = truth_from_json(nlohmann::json::parse(to_json(g.truth).dump()));
  EXPECT_EQ(back.topic_terms, g.truth.topic_terms);
  EXPECT_EQ(back.topic_of_doc, g.truth.topic_of_doc);
}

TEST(PlantedRecovery, DefaultSpecRecoversTopics) {
  const auto g = generate_corpus(PlantedSpec{});
  const auto model = fcm::testing::model_for(g);
  const auto report = score_recovery(model, g.truth, 10);
  EXPECT_GE(report.mean_precision, 0.7);
  EXPECT_EQ(std::set<std::size_t>(report.assignment.begin(), report.assignment.end()).size(), 4u);
  for (double p : document_purity(model, g.truth, report, 20)) EXPECT_GE(p, 0.7);
}

namespace {

const std::vector<double> kWeights{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

double precision_at(std::uint64_t seed, double weight) {
  PlantedSpec spec;
  spec.seed = seed;
  spec.topic_weight = weight;
  const auto g = generate_corpus(spec);
  return score_recovery(fcm::testing::model_for(g), g.truth, 10).mean_precision;
}

}  // namespace

// Pinned seeds. Other seeds can dip: concepts 2..4 share nearly equal singular
// values, so which topic falls out of the top 10 varies.
TEST(PlantedRecovery, NonDecreasingInTopicWeight) {
  for (std::uint64_t seed : {2, 3}) {
    double previous = 0.0;
    for (double w : kWeights) {
      const double p = precision_at(seed, w);
      EXPECT_GE(p, previous) << "seed " << seed << " weight " << w;
      previous = p;
    }
  }
}

TEST(PlantedRecovery, SeedAverageNonDecreasingInTopicWeight) {
  double previous = 0.0;
  for (double w : kWeights) {
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) sum += precision_at(seed, w);
    EXPECT_GE(sum / 8, previous) << "weight " << w;
    previous = sum / 8;
  }
}

TEST(FleetCorpus, Layout) {
  const auto pc = generate_fleet_corpus(7);
  EXPECT_EQ(pc.records.size(), 1312u);
  std::map<std::string, std::size_t> count;
  std::map<std::string, double> hours;
  std::set<std::string> ids;
  for (const auto& r : pc.records.records) {
    ++count[r.component];
    hours[r.component] += r.downtime_hours.value();
    ids.insert(r.record_id);
    ASSERT_TRUE(r.event_date.has_value());
    EXPECT_GE(*r.event_date, "2012-01-01");
    EXPECT_LE(*r.event_date, "2018-11-30");
  }
  EXPECT_EQ(ids.size(), 1312u);
  double total = 0;
  for (const auto& plan : fleet_components()) {
    EXPECT_EQ(count[plan.tag], plan.records);
    EXPECT_EQ(hours[plan.tag], plan.downtime_hours);
    EXPECT_EQ(pc.truth.at(plan.tag).topic_terms.size(), plan.topics);
    total += hours[plan.tag];
  }
  EXPECT_EQ(total, 6565.0);
  EXPECT_EQ(corpus::to_jsonl(generate_fleet_corpus(7).records), corpus::to_jsonl(pc.records));
}
