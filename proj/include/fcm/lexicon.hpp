#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fcm::lexicon {

/// Coarse part of speech used to disambiguate lemma entries.
enum class Pos { noun, verb, adj, adv };

std::string_view to_string(Pos pos);
std::optional<Pos> parse_pos(std::string_view s);

/// Surface form -> lemma, with optional part-of-speech keyed entries.
struct LemmaTable {
  std::map<std::string, std::string> plain;
  std::map<std::string, std::map<Pos, std::string>> tagged;

  bool empty() const { return plain.empty() && tagged.empty(); }
  bool contains(const std::string& form) const {
    return plain.count(form) > 0 || tagged.count(form) > 0;
  }
  /// Tagged entry for `tag` first, then the plain entry, then any tagged entry
  /// in noun/verb/adj/adv order.
  std::optional<std::string> lookup(const std::string& form, std::optional<Pos> tag) const;

  bool operator==(const LemmaTable&) const = default;
};

/// The dictionaries that drive preprocessing. Immutable once loaded.
struct Lexicon {
  std::set<std::string> stopwords;
  std::vector<std::string> phrases;  // 2-3 space-separated lowercase words
  std::map<std::string, std::string> synonyms;  // variant -> canonical
  LemmaTable lemmas;

  bool is_stopword(const std::string& token) const { return stopwords.count(token) > 0; }
  bool operator==(const Lexicon&) const = default;
};

struct LexiconPaths {
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> phrases;
  std::optional<std::filesystem::path> synonyms;
  std::optional<std::filesystem::path> lemmas;
};

/// Missing paths give empty dictionaries, except stopwords which fall back to
/// the bundled English list. Throws PhraseArity, SynonymCycle, DuplicateKey.
Lexicon load_lexicon(const LexiconPaths& paths);

// Text parsers behind load_lexicon; `label` names the source in errors.
std::set<std::string> parse_stopwords(const std::string& text);
std::vector<std::string> parse_phrases(const std::string& text, const std::string& label);
std::map<std::string, std::string> parse_synonyms(const std::string& text, const std::string& label);
LemmaTable parse_lemmas(const std::string& text, const std::string& label);

/// Rejects chains and cycles: no canonical target may itself be a variant.
void check_synonyms(const std::map<std::string, std::string>& synonyms);

struct Diagnostic {
  std::string code;
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

/// Non-fatal consistency warnings; empty means clean.
std::vector<Diagnostic> validate_lexicon(const Lexicon& lex);

// Bundled defaults. These are generic placeholders, not a reconstruction of
// any published dictionary.
const std::set<std::string>& bundled_stopwords();
std::vector<std::string> bundled_phrases();
std::map<std::string, std::string> bundled_synonyms();
/// Regular inflections generated from a base-word list plus irregular forms.
LemmaTable bundled_lemmas();
Lexicon bundled_lexicon();

// Serializers producing the same line formats the parsers read.
std::string format_stopwords(const std::set<std::string>& stopwords);
std::string format_phrases(const std::vector<std::string>& phrases);
std::string format_synonyms(const std::map<std::string, std::string>& synonyms);
std::string format_lemmas(const LemmaTable& lemmas);

/// Writes stopwords.txt, phrases.txt, synonyms.txt and lemmas.tsv into `dir`.
void write_lexicon(const Lexicon& lex, const std::filesystem::path& dir);

}  // namespace fcm::lexicon
