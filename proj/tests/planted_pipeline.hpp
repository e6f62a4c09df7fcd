#pragma once

// In-memory pipeline over a generated corpus: bundled dictionaries, TF-IDF,
// exact SVD, concept model.

#include <algorithm>

#include "fcm/concepts.hpp"
#include "fcm/lexicon.hpp"
#include "fcm/preprocess.hpp"
#include "fcm/svd.hpp"
#include "fcm/synthgen.hpp"
#include "fcm/vectorize.hpp"

namespace fcm::testing {

inline concepts::ConceptModel model_for(const corpus::RecordSet& records, const std::string& component,
                                        double min_df = 0.025, std::size_t k = 10) {
  const auto lex = lexicon::bundled_lexicon();
  const auto tokens = preprocess::preprocess_corpus(records, lex);
  const auto tfidf = vectorize::build_tfidf(tokens.docs, min_df);
  const auto full = svd::svd_exact(tfidf.matrix.to_dense());
  const auto factors = svd::truncate(full, std::min(k, svd::numerical_rank(full.s)));
  std::vector<std::string> ids;
  for (const auto& d : tokens.docs) ids.push_back(d.record_id);
  return concepts::build_concept_model(factors, factors.m, tfidf.vocab.terms, ids, component);
}

inline concepts::ConceptModel model_for(const synthgen::Generated& gen, double min_df = 0.025, std::size_t k = 10) {
  return model_for(gen.records, gen.records.records.front().component, min_df, k);
}

}  // namespace fcm::testing
