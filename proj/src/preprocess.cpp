#include "fcm/preprocess.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <stdexcept>
#include <thread>

#include "fcm/error.hpp"
#include "fcm/io_util.hpp"

namespace fcm::preprocess {

namespace {

bool is_word_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
bool is_connector(char c) { return c == '-' || c == '_'; }

const icu::Normalizer2& nfkc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC normalizer unavailable");
  return *n;
}

const icu::Normalizer2& nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFD normalizer unavailable");
  return *n;
}

// Maps one lowercase code point onto the restricted alphabet; ' ' means separator.
char fold(UChar32 cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    if (is_word_char(c) || is_connector(c)) return c;
    return ' ';
  }
  if (cp == 0x2010 || cp == 0x2011) return '-';  // Unicode hyphens
  if (!u_isalpha(cp)) return ' ';
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString decomposed = nfd().normalize(icu::UnicodeString(cp), status);
  if (U_FAILURE(status) || decomposed.isEmpty()) return ' ';
  const UChar32 base = decomposed.char32At(0);
  if (base < 0x80 && is_word_char(static_cast<char>(base))) return static_cast<char>(base);
  return ' ';
}

bool has_underscore(const std::string& t) { return t.find('_') != std::string::npos; }

bool all_digits(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string join(const Tokens& tokens, std::size_t from, std::size_t n, char sep) {
  std::string out = tokens[from];
  for (std::size_t i = 1; i < n; ++i) {
    out.push_back(sep);
    out += tokens[from + i];
  }
  return out;
}

}  // namespace

Tokens normalize_text(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  text = nfkc().normalize(text, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFKC normalization failed");
  text.toLower(icu::Locale::getRoot());

  std::string folded;
  folded.reserve(static_cast<std::size_t>(text.length()));
  for (int32_t i = 0; i < text.length(); i = text.moveIndex32(i, 1)) folded.push_back(fold(text.char32At(i)));

  Tokens out;
  for (auto& piece : io::split_ws(folded)) {
    // Connectors only survive between word characters.
    std::size_t b = 0, e = piece.size();
    while (b < e && is_connector(piece[b])) ++b;
    while (e > b && is_connector(piece[e - 1])) --e;
    if (b < e) out.push_back(piece.substr(b, e - b));
  }
  return out;
}

Preprocessor::Preprocessor(const lexicon::Lexicon& lex, Options options)
    : lex_(lex), options_(options) {
  for (const auto& phrase : lex.phrases) {
    const auto words = io::split_ws(phrase);
    (words.size() == 3 ? trigrams_ : bigrams_).insert(join(words, 0, words.size(), ' '));
  }
}

Tokens Preprocessor::merge_phrases(const Tokens& tokens) const {
  Tokens out;
  out.reserve(tokens.size());
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (i + 3 <= tokens.size() && !trigrams_.empty() && trigrams_.count(join(tokens, i, 3, ' '))) {
      out.push_back(join(tokens, i, 3, '_'));
      i += 3;
    } else if (i + 2 <= tokens.size() && !bigrams_.empty() && bigrams_.count(join(tokens, i, 2, ' '))) {
      out.push_back(join(tokens, i, 2, '_'));
      i += 2;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

Tokens merge_phrases(const Tokens& tokens, const lexicon::Lexicon& lex) {
  return Preprocessor(lex).merge_phrases(tokens);
}

Tokens apply_synonyms(const Tokens& tokens, const lexicon::Lexicon& lex) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = lex.synonyms.find(t);
    out.push_back(it == lex.synonyms.end() ? t : it->second);
  }
  return out;
}

Tokens drop_stopwords(const Tokens& tokens, const lexicon::Lexicon& lex, const Options& options) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (lex.is_stopword(t)) continue;
    if (options.drop_numeric && all_digits(t)) continue;
    out.push_back(t);
  }
  return out;
}

lexicon::Pos guess_pos(std::string_view t) {
  auto ends = [&](std::string_view s) { return t.size() > s.size() + 1 && t.substr(t.size() - s.size()) == s; };
  if (ends("ing") || ends("ed")) return lexicon::Pos::verb;
  if (ends("ly")) return lexicon::Pos::adv;
  for (auto s : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less"})
    if (ends(s)) return lexicon::Pos::adj;
  return lexicon::Pos::noun;
}

Tokens lemmatize(const Tokens& tokens, const lexicon::Lexicon& lex) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (has_underscore(t) || lex.lemmas.empty()) {
      out.push_back(t);
      continue;
    }
    auto lemma = lex.lemmas.lookup(t, guess_pos(t));
    out.push_back(lemma ? *lemma : t);
  }
  return out;
}

Tokens Preprocessor::run(std::string_view raw) const {
  Tokens t = normalize_text(raw);
  t = merge_phrases(t);
  t = apply_synonyms(t, lex_);
  t = drop_stopwords(t, lex_, options_);
  return lemmatize(t, lex_);
}

TokenizedDoc Preprocessor::process(const corpus::FailureRecord& rec) const {
  TokenizedDoc doc{rec.record_id, run(rec.description), 0};
  doc.token_count = doc.tokens.size();
  if (doc.tokens.empty()) throw EmptyAfterPreprocessing(rec.record_id);
  return doc;
}

TokenizedDoc preprocess_record(const corpus::FailureRecord& rec, const lexicon::Lexicon& lex,
                               const Options& options) {
  return Preprocessor(lex, options).process(rec);
}

CorpusTokens preprocess_corpus(const corpus::RecordSet& set, const lexicon::Lexicon& lex,
                               const Options& options) {
  const Preprocessor pre(lex, options);
  CorpusTokens out;
  out.docs.resize(set.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& rec = set.records[i];
      auto& doc = out.docs[i];
      doc.record_id = rec.record_id;
      doc.tokens = pre.run(rec.description);
      doc.token_count = doc.tokens.size();
    }
  };

  const std::size_t n = set.size();
  const std::size_t workers =
      n < 256 ? 1 : std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), 8);
  if (workers == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& doc : out.docs)
    if (doc.tokens.empty()) out.empty_records.push_back(doc.record_id);
  return out;
}

std::string format_token_dump(const std::vector<TokenizedDoc>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    out += doc.record_id;
    out.push_back('\t');
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i) out.push_back(' ');
      out += doc.tokens[i];
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<TokenizedDoc> parse_token_dump(const std::string& text) {
  std::vector<TokenizedDoc> docs;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw MalformedRow(line_no, "token dump line without TAB");
    TokenizedDoc doc;
    doc.record_id = std::string(line.substr(0, tab));
    doc.tokens = io::split_ws(line.substr(tab + 1));
    doc.token_count = doc.tokens.size();
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace fcm::preprocess
