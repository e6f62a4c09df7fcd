#include "fcm/concepts.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "fcm/error.hpp"

namespace fcm::concepts {

using Eigen::Index;

void apply_sign_convention(ConceptModel& model) {
  for (Index c = 0; c < model.ct.rows(); ++c) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index t = 0; t < model.ct.cols(); ++t) {
      const double a = std::abs(model.ct(c, t));
      if (a > best_abs) {
        best_abs = a;
        best = t;
      }
    }
    if (model.ct.cols() > 0 && model.ct(c, best) < 0.0) {
      model.ct.row(c) *= -1.0;
      model.dc.col(c) *= -1.0;
    }
  }
}

ConceptModel build_concept_model(const svd::SvdFactors& factors, std::size_t k,
                                 std::vector<std::string> terms, std::vector<std::string> record_ids,
                                 std::string component) {
  if (k > factors.m) throw KTooLarge(k, factors.m);
  if (static_cast<std::size_t>(factors.g.rows()) != terms.size() ||
      static_cast<std::size_t>(factors.d.rows()) != record_ids.size())
    throw Error(ErrorKind::data, "ShapeMismatch", "factors do not match vocabulary or document list");

  ConceptModel model;
  model.component = std::move(component);
  model.k = k;
  const auto kk = static_cast<Index>(k);
  model.singular_values.assign(factors.s.data(), factors.s.data() + kk);
  model.ct = factors.g.leftCols(kk).transpose();
  model.dc = factors.d.leftCols(kk);
  model.terms = std::move(terms);
  model.record_ids = std::move(record_ids);
  apply_sign_convention(model);
  return model;
}

std::size_t detect_elbow(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 3) throw TooFewValues(n);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  auto y = [&](std::size_t i) { return range > 0.0 ? (values[i] - *lo) / range : 0.0; };

  // Chord from (0, y0) to (1, y_last): slope * x - y + y0 = 0.
  const double y0 = y(0), slope = y(n - 1) - y0;
  const double denom = std::sqrt(slope * slope + 1.0);
  std::size_t best = 0;
  double best_dist = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    const double dist = std::abs(slope * x - y(i) + y0) / denom;
    if (dist > best_dist + 1e-12) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

std::vector<Loading> filter_ranked(const std::vector<Loading>& ranked, std::size_t limit,
                                   std::optional<double> min_loading) {
  std::vector<Loading> out;
  for (const auto& l : ranked) {
    if (out.size() >= limit) break;
    if (min_loading && l.loading < *min_loading) break;
    out.push_back(l);
  }
  return out;
}

namespace {

template <typename Get>
std::vector<Loading> ranked(std::size_t n, const std::vector<std::string>& keys, Get get,
                            std::size_t limit, std::optional<double> min_loading) {
  if (limit < 1) throw Error(ErrorKind::usage, "InvalidLimit", "limit must be >= 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return get(a) > get(b); });
  std::vector<Loading> all;
  all.reserve(std::min(n, limit));
  for (std::size_t i : order) {
    if (all.size() >= limit) break;
    if (min_loading && get(i) < *min_loading) break;
    all.push_back({keys[i], get(i)});
  }
  return all;
}

void check_concept(const ConceptModel& model, std::size_t c) {
  if (c >= model.k)
    throw Error(ErrorKind::usage, "InvalidConcept",
                "concept index " + std::to_string(c) + " out of range (k=" + std::to_string(model.k) + ")");
}

}  // namespace

std::vector<Loading> top_terms(const ConceptModel& model, std::size_t c, std::size_t limit,
                               std::optional<double> min_loading) {
  check_concept(model, c);
  const auto row = static_cast<Index>(c);
  return ranked(model.terms.size(), model.terms,
                [&](std::size_t t) { return model.ct(row, static_cast<Index>(t)); }, limit, min_loading);
}

std::vector<Loading> top_documents(const ConceptModel& model, std::size_t c, std::size_t limit,
                                   std::optional<double> min_loading) {
  check_concept(model, c);
  const auto col = static_cast<Index>(c);
  return ranked(model.record_ids.size(), model.record_ids,
                [&](std::size_t d) { return model.dc(static_cast<Index>(d), col); }, limit, min_loading);
}

std::string concept_name(const std::string& component, std::size_t ordinal) {
  if (ordinal < 1) throw Error(ErrorKind::usage, "InvalidOrdinal", "concept ordinals start at 1");
  std::string abbrev;
  if (component == "annular")
    abbrev = "AC";
  else if (component == "shear_ram")
    abbrev = "SRC";
  else if (component == "regulator")
    abbrev = "RC";
  else if (component == "ccsv")
    abbrev = "SVC";
  else {
    for (char ch : component) abbrev.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    abbrev += "C";
  }
  return abbrev + std::to_string(ordinal);
}

std::string_view to_string(Facet facet) {
  switch (facet) {
    case Facet::failure_mode: return "failure_mode";
    case Facet::detection_method: return "detection_method";
    case Facet::component_part: return "component_part";
    case Facet::corrective_action: return "corrective_action";
    case Facet::suspected_cause: return "suspected_cause";
    case Facet::other: return "other";
  }
  return "other";
}

std::optional<Facet> parse_facet(std::string_view s) {
  for (Facet f : {Facet::failure_mode, Facet::detection_method, Facet::component_part,
                  Facet::corrective_action, Facet::suspected_cause, Facet::other})
    if (to_string(f) == s) return f;
  return std::nullopt;
}

ConceptSummary summarize(const ConceptModel& model, std::size_t c, std::size_t term_limit,
                         std::size_t doc_limit) {
  ConceptSummary s;
  s.name = concept_name(model.component, c + 1);
  s.sigma = model.singular_values.at(c);
  s.terms = top_terms(model, c, term_limit);
  s.documents = top_documents(model, c, doc_limit);
  return s;
}

Scenario assemble_scenario(const ConceptSummary& summary, const std::string& component,
                           const std::map<std::string, Facet>& labels, std::optional<std::string> narrative) {
  Scenario sc;
  sc.concept_name = summary.name;
  sc.component = component;
  sc.singular_value = summary.sigma;
  sc.top_terms = summary.terms;
  sc.top_documents = summary.documents;
  sc.narrative = std::move(narrative);
  for (const auto& [term, facet] : labels) {
    const bool known = std::any_of(summary.terms.begin(), summary.terms.end(),
                                   [&](const Loading& l) { return l.key == term; });
    if (!known) throw UnknownLabeledTerm(term);
  }
  for (const auto& l : summary.terms) {
    auto it = labels.find(l.key);
    sc.facet_labels[l.key] = it == labels.end() ? Facet::other : it->second;
  }
  return sc;
}

Scenario assemble_scenario(const ConceptModel& model, std::size_t c, std::size_t term_limit,
                           std::size_t doc_limit, const std::map<std::string, Facet>& labels) {
  return assemble_scenario(summarize(model, c, term_limit, doc_limit), model.component, labels);
}

ConceptsDocument export_concepts(const ConceptModel& model, const ExportOptions& options) {
  ConceptsDocument doc;
  doc.component = model.component;
  doc.k = model.k;
  doc.singular_values = model.singular_values;
  if (model.k >= 3) doc.elbow_index = detect_elbow(model.singular_values);
  doc.loading_scale = options.sigma_scaled ? "sigma" : "unit";
  for (std::size_t c = 0; c < model.k; ++c) {
    auto s = summarize(model, c, options.term_limit, options.doc_limit);
    if (options.sigma_scaled) {
      for (auto& l : s.terms) l.loading *= s.sigma;
      for (auto& l : s.documents) l.loading *= s.sigma;
    }
    doc.concepts.push_back(std::move(s));
  }
  return doc;
}

namespace {

nlohmann::ordered_json loadings_json(const std::vector<Loading>& ls, const char* key) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& l : ls) arr.push_back({{key, l.key}, {"loading", l.loading}});
  return arr;
}

std::vector<Loading> loadings_from(const nlohmann::json& arr, const char* key) {
  std::vector<Loading> out;
  for (const auto& e : arr) out.push_back({e.at(key).get<std::string>(), e.at("loading").get<double>()});
  return out;
}

}  // namespace

nlohmann::ordered_json to_json(const ConceptsDocument& doc) {
  nlohmann::ordered_json j;
  j["component"] = doc.component;
  j["k"] = doc.k;
  j["singular_values"] = doc.singular_values;
  j["elbow_index"] = doc.elbow_index ? nlohmann::ordered_json(*doc.elbow_index) : nlohmann::ordered_json();
  j["loading_scale"] = doc.loading_scale;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : doc.concepts) {
    arr.push_back({{"name", c.name},
                   {"sigma", c.sigma},
                   {"terms", loadings_json(c.terms, "term")},
                   {"documents", loadings_json(c.documents, "record_id")}});
  }
  j["concepts"] = std::move(arr);
  return j;
}

ConceptsDocument concepts_from_json(const nlohmann::json& j) {
  ConceptsDocument doc;
  doc.component = j.at("component").get<std::string>();
  doc.k = j.at("k").get<std::size_t>();
  doc.singular_values = j.at("singular_values").get<std::vector<double>>();
  if (j.contains("elbow_index") && !j["elbow_index"].is_null()) doc.elbow_index = j["elbow_index"].get<std::size_t>();
  doc.loading_scale = j.value("loading_scale", "unit");
  for (const auto& c : j.at("concepts")) {
    ConceptSummary s;
    s.name = c.at("name").get<std::string>();
    s.sigma = c.at("sigma").get<double>();
    s.terms = loadings_from(c.at("terms"), "term");
    s.documents = loadings_from(c.at("documents"), "record_id");
    doc.concepts.push_back(std::move(s));
  }
  return doc;
}

nlohmann::ordered_json to_json(const Scenario& sc) {
  nlohmann::ordered_json facets = nlohmann::ordered_json::object();
  for (const auto& l : sc.top_terms) facets[l.key] = std::string(to_string(sc.facet_labels.at(l.key)));
  return {{"concept_name", sc.concept_name},
          {"component", sc.component},
          {"singular_value", sc.singular_value},
          {"top_terms", loadings_json(sc.top_terms, "term")},
          {"top_documents", loadings_json(sc.top_documents, "record_id")},
          {"facet_labels", std::move(facets)},
          {"narrative", sc.narrative ? nlohmann::ordered_json(*sc.narrative) : nlohmann::ordered_json()}};
}

}  // namespace fcm::concepts
