#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fcm/svd.hpp"
#include "json.hpp"

namespace fcm::concepts {

/// Concept-term and document-concept loadings of one component run.
struct ConceptModel {
  std::string component;
  std::size_t k = 0;
  std::vector<double> singular_values;
  Eigen::MatrixXd ct;  // k x terms
  Eigen::MatrixXd dc;  // documents x k
  std::vector<std::string> terms;
  std::vector<std::string> record_ids;
};

/// Takes the first k singular vectors and applies the sign convention.
/// Throws KTooLarge when k exceeds the factor count.
ConceptModel build_concept_model(const svd::SvdFactors& factors, std::size_t k,
                                 std::vector<std::string> terms, std::vector<std::string> record_ids,
                                 std::string component);

/// Flips each concept so that its largest-magnitude term loading is positive
/// (first such term on ties); the document loadings flip with it.
void apply_sign_convention(ConceptModel& model);

/// Index of the point farthest from the chord joining the first and last
/// points after scaling both axes to [0, 1]; ties go to the smallest index.
/// Throws TooFewValues below three values.
std::size_t detect_elbow(const std::vector<double>& singular_values);

struct Loading {
  std::string key;  // term or record_id
  double loading = 0.0;
  bool operator==(const Loading&) const = default;
};

inline constexpr std::size_t kDefaultTermLimit = 25;
inline constexpr std::size_t kDefaultConceptCount = 10;

/// Sorted by signed loading, descending; cut at `limit` and at `min_loading`.
std::vector<Loading> top_terms(const ConceptModel& model, std::size_t concept_index,
                               std::size_t limit = kDefaultTermLimit,
                               std::optional<double> min_loading = std::nullopt);
std::vector<Loading> top_documents(const ConceptModel& model, std::size_t concept_index,
                                   std::size_t limit, std::optional<double> min_loading = std::nullopt);

/// Applies limit and threshold to an already ranked list.
std::vector<Loading> filter_ranked(const std::vector<Loading>& ranked, std::size_t limit,
                                   std::optional<double> min_loading);

/// Component abbreviation plus 1-based ordinal, e.g. ("annular", 1) -> "AC1".
std::string concept_name(const std::string& component, std::size_t ordinal);

enum class Facet { failure_mode, detection_method, component_part, corrective_action, suspected_cause, other };

std::string_view to_string(Facet facet);
std::optional<Facet> parse_facet(std::string_view s);

struct Scenario {
  std::string concept_name;
  std::string component;
  double singular_value = 0.0;
  std::vector<Loading> top_terms;
  std::vector<Loading> top_documents;
  std::map<std::string, Facet> facet_labels;  // every top term appears
  std::optional<std::string> narrative;
};

/// A concept as exported to concepts.json.
struct ConceptSummary {
  std::string name;
  double sigma = 0.0;
  std::vector<Loading> terms;
  std::vector<Loading> documents;
};

/// Labels may only name terms in `summary.terms`; unlabeled terms get `other`.
/// Throws UnknownLabeledTerm.
Scenario assemble_scenario(const ConceptSummary& summary, const std::string& component,
                           const std::map<std::string, Facet>& labels,
                           std::optional<std::string> narrative = std::nullopt);
Scenario assemble_scenario(const ConceptModel& model, std::size_t concept_index, std::size_t term_limit,
                           std::size_t doc_limit, const std::map<std::string, Facet>& labels);

ConceptSummary summarize(const ConceptModel& model, std::size_t concept_index, std::size_t term_limit,
                         std::size_t doc_limit);

/// Parsed concepts.json.
struct ConceptsDocument {
  std::string component;
  std::size_t k = 0;
  std::vector<double> singular_values;
  std::optional<std::size_t> elbow_index;
  std::string loading_scale = "unit";
  std::vector<ConceptSummary> concepts;
};

struct ExportOptions {
  std::size_t term_limit = kDefaultTermLimit;
  std::size_t doc_limit = 10;
  /// Multiply loadings by the concept's singular value.
  bool sigma_scaled = false;
};

ConceptsDocument export_concepts(const ConceptModel& model, const ExportOptions& options = {});
nlohmann::ordered_json to_json(const ConceptsDocument& doc);
ConceptsDocument concepts_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Scenario& scenario);

}  // namespace fcm::concepts
