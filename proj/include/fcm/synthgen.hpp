#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fcm/concepts.hpp"
#include "fcm/corpus.hpp"
#include "json.hpp"

namespace fcm::synthgen {

/// Parameters of a planted-topic corpus.
struct PlantedSpec {
  std::size_t n_topics = 4;
  std::size_t terms_per_topic = 40;
  std::size_t background_terms = 80;
  std::size_t docs = 400;
  std::size_t doc_length_min = 30;
  std::size_t doc_length_max = 60;
  double topic_weight = 0.8;  // probability a token comes from the document's topic
  std::string component_tag = "annular";
  std::uint64_t seed = 42;
  /// Prefix of generated term names; topic terms are "<prefix>t<topic>w<index>",
  /// background terms "<prefix>bg<index>".
  std::string term_prefix;
};

struct GroundTruth {
  std::map<std::string, std::size_t> topic_of_doc;
  std::vector<std::vector<std::string>> topic_terms;
};

struct Generated {
  corpus::RecordSet records;
  GroundTruth truth;
};

/// Topics are assigned round-robin, shuffled, then each token is drawn from the
/// document's topic (probability topic_weight) or the background, uniformly.
/// Throws SpecInfeasible.
Generated generate_corpus(const PlantedSpec& spec);

struct RecoveryReport {
  std::vector<std::size_t> assignment;  // topic -> concept index
  std::vector<std::size_t> overlap;     // per topic
  std::vector<double> precision_at_n;   // per topic
  double mean_precision = 0.0;
  std::size_t top_n = 0;
};

/// Greedy one-to-one matching by descending overlap between each concept's
/// top-n terms and each planted topic. Throws MoreTopicsThanConcepts.
RecoveryReport score_recovery(const concepts::ConceptModel& model, const GroundTruth& truth, std::size_t top_n);
/// Same, over ranked term lists (for instance read back from concepts.json).
RecoveryReport score_recovery(const std::vector<std::vector<std::string>>& concept_terms,
                              const GroundTruth& truth, std::size_t top_n);

/// Fraction of each concept's top documents generated from its matched topic.
std::vector<double> document_purity(const concepts::ConceptModel& model, const GroundTruth& truth,
                                    const RecoveryReport& report, std::size_t top_docs);

/// Per-component layout of the four-component fleet corpus.
struct ComponentPlan {
  std::string tag;
  std::size_t records;
  double downtime_hours;
  std::size_t topics;
};

/// 1312 records: annular 247, shear_ram 310, regulator 421, ccsv 334, with
/// downtime totals summing to 6565 hours.
const std::vector<ComponentPlan>& fleet_components();

struct FleetCorpus {
  corpus::RecordSet records;  // components interleaved in seeded order
  std::map<std::string, GroundTruth> truth;
};

FleetCorpus generate_fleet_corpus(std::uint64_t seed);

nlohmann::ordered_json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RecoveryReport& report);

}  // namespace fcm::synthgen
