#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fcm/corpus.hpp"
#include "fcm/lexicon.hpp"

namespace fcm::preprocess {

using Tokens = std::vector<std::string>;

/// A record reduced to lowercase tokens (words or underscore-joined phrases).
struct TokenizedDoc {
  std::string record_id;
  Tokens tokens;
  std::size_t token_count = 0;

  bool operator==(const TokenizedDoc&) const = default;
};

struct Options {
  /// Remove tokens made only of digits along with the stopwords.
  bool drop_numeric = false;
};

/// NFKC-normalizes, lowercases, and splits on anything outside [a-z0-9]; '-' and
/// '_' survive only between word characters. Accented Latin letters fold to
/// their ASCII base.
Tokens normalize_text(std::string_view raw);

/// Longest match first (trigrams, then bigrams), left to right, non-overlapping.
Tokens merge_phrases(const Tokens& tokens, const lexicon::Lexicon& lex);
Tokens apply_synonyms(const Tokens& tokens, const lexicon::Lexicon& lex);
Tokens drop_stopwords(const Tokens& tokens, const lexicon::Lexicon& lex, const Options& options = {});
/// Single-word tokens only; underscore-joined phrases pass through.
Tokens lemmatize(const Tokens& tokens, const lexicon::Lexicon& lex);

/// Suffix-rule part-of-speech guess used to pick among tagged lemma entries.
lexicon::Pos guess_pos(std::string_view token);

/// Caches the phrase index of one lexicon; reusable across threads.
class Preprocessor {
 public:
  explicit Preprocessor(const lexicon::Lexicon& lex, Options options = {});

  Tokens merge_phrases(const Tokens& tokens) const;
  /// All five stages in order; never throws.
  Tokens run(std::string_view raw) const;
  /// Throws EmptyAfterPreprocessing when nothing survives.
  TokenizedDoc process(const corpus::FailureRecord& rec) const;

  const lexicon::Lexicon& lexicon() const { return lex_; }

 private:
  const lexicon::Lexicon& lex_;
  Options options_;
  std::unordered_set<std::string> bigrams_, trigrams_;
};

/// normalize_text -> merge_phrases -> apply_synonyms -> drop_stopwords -> lemmatize.
TokenizedDoc preprocess_record(const corpus::FailureRecord& rec, const lexicon::Lexicon& lex,
                               const Options& options = {});

struct CorpusTokens {
  std::vector<TokenizedDoc> docs;  // one per record, same order
  std::vector<std::string> empty_records;
};

/// Preprocesses every record (in parallel for large sets). Records that end up
/// empty stay in `docs` with no tokens and are listed in `empty_records`.
CorpusTokens preprocess_corpus(const corpus::RecordSet& set, const lexicon::Lexicon& lex,
                               const Options& options = {});

/// "record_id<TAB>space-joined tokens" per line.
std::string format_token_dump(const std::vector<TokenizedDoc>& docs);
std::vector<TokenizedDoc> parse_token_dump(const std::string& text);

}  // namespace fcm::preprocess
