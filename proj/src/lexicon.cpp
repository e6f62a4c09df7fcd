#include "fcm/lexicon.hpp"

#include <algorithm>
#include <cctype>

#include "fcm/error.hpp"
#include "fcm/io_util.hpp"

namespace fcm::lexicon {

std::string_view to_string(Pos pos) {
  switch (pos) {
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::adj: return "adj";
    case Pos::adv: return "adv";
  }
  return "noun";
}

std::optional<Pos> parse_pos(std::string_view s) {
  if (s == "noun" || s == "n") return Pos::noun;
  if (s == "verb" || s == "v") return Pos::verb;
  if (s == "adj" || s == "a") return Pos::adj;
  if (s == "adv" || s == "r") return Pos::adv;
  return std::nullopt;
}

std::optional<std::string> LemmaTable::lookup(const std::string& form, std::optional<Pos> tag) const {
  auto t = tagged.find(form);
  if (tag && t != tagged.end()) {
    if (auto hit = t->second.find(*tag); hit != t->second.end()) return hit->second;
  }
  if (auto p = plain.find(form); p != plain.end()) return p->second;
  if (t != tagged.end() && !t->second.empty()) return t->second.begin()->second;
  return std::nullopt;
}

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_token(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

// Calls fn(line_no, trimmed_line) for every non-blank, non-comment line.
template <typename Fn>
void for_each_entry(const std::string& text, Fn&& fn) {
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    std::string line = io::trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    if (line.empty() || line[0] == '#') continue;
    fn(line_no, line);
  }
}

Error malformed(const std::string& label, std::size_t line_no, const std::string& why) {
  return Error(ErrorKind::data, "MalformedLexicon",
               label + ":" + std::to_string(line_no) + ": " + why);
}

}  // namespace

std::set<std::string> parse_stopwords(const std::string& text) {
  std::set<std::string> out;
  for_each_entry(text, [&](std::size_t, const std::string& line) {
    for (auto& w : io::split_ws(line)) out.insert(lower(w));
  });
  return out;
}

std::vector<std::string> parse_phrases(const std::string& text, const std::string& label) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for_each_entry(text, [&](std::size_t line_no, const std::string& line) {
    auto words = io::split_ws(lower(line));
    std::string phrase;
    for (const auto& w : words) phrase += (phrase.empty() ? "" : " ") + w;
    if (words.size() < 2 || words.size() > 3) throw PhraseArity(line_no, phrase);
    for (const auto& w : words)
      if (!is_token(w)) throw malformed(label, line_no, "phrase word '" + w + "' is not a token");
    if (!seen.insert(phrase).second) throw DuplicateKey(phrase, label);
    out.push_back(phrase);
  });
  return out;
}

std::map<std::string, std::string> parse_synonyms(const std::string& text, const std::string& label) {
  std::map<std::string, std::string> out;
  for_each_entry(text, [&](std::size_t line_no, const std::string& line) {
    const auto arrow = line.find("=>");
    if (arrow == std::string::npos) throw malformed(label, line_no, "expected 'variant => canonical'");
    const std::string variant = lower(io::trim(std::string_view(line).substr(0, arrow)));
    const std::string canonical = lower(io::trim(std::string_view(line).substr(arrow + 2)));
    if (!is_token(variant) || !is_token(canonical))
      throw malformed(label, line_no, "synonym sides must be single tokens");
    if (!out.emplace(variant, canonical).second) throw DuplicateKey(variant, label);
  });
  check_synonyms(out);
  return out;
}

void check_synonyms(const std::map<std::string, std::string>& synonyms) {
  for (const auto& [variant, canonical] : synonyms)
    if (synonyms.count(canonical)) throw SynonymCycle(canonical);
}

LemmaTable parse_lemmas(const std::string& text, const std::string& label) {
  LemmaTable table;
  for_each_entry(text, [&](std::size_t line_no, const std::string& line) {
    std::vector<std::string> cols;
    std::size_t s = 0;
    while (true) {
      auto tab = line.find('\t', s);
      cols.push_back(lower(io::trim(std::string_view(line).substr(s, tab == std::string::npos ? std::string::npos : tab - s))));
      if (tab == std::string::npos) break;
      s = tab + 1;
    }
    if (cols.size() != 2 && cols.size() != 3)
      throw malformed(label, line_no, "expected 'form<TAB>lemma' or 'form<TAB>pos<TAB>lemma'");
    const std::string& form = cols.front();
    const std::string& lemma = cols.back();
    if (!is_token(form)) throw malformed(label, line_no, "form '" + form + "' is not a token");
    if (!is_token(lemma)) throw malformed(label, line_no, "lemma must be a non-empty lowercase token");
    if (cols.size() == 2) {
      if (!table.plain.emplace(form, lemma).second) throw DuplicateKey(form, label);
    } else {
      auto pos = parse_pos(cols[1]);
      if (!pos) throw malformed(label, line_no, "unknown part of speech '" + cols[1] + "'");
      if (!table.tagged[form].emplace(*pos, lemma).second)
        throw DuplicateKey(form + "/" + cols[1], label);
    }
  });
  return table;
}

Lexicon load_lexicon(const LexiconPaths& paths) {
  Lexicon lex;
  lex.stopwords = paths.stopwords ? parse_stopwords(io::read_file(*paths.stopwords)) : bundled_stopwords();
  if (paths.phrases) lex.phrases = parse_phrases(io::read_file(*paths.phrases), paths.phrases->string());
  if (paths.synonyms)
    lex.synonyms = parse_synonyms(io::read_file(*paths.synonyms), paths.synonyms->string());
  if (paths.lemmas) lex.lemmas = parse_lemmas(io::read_file(*paths.lemmas), paths.lemmas->string());
  return lex;
}

std::vector<Diagnostic> validate_lexicon(const Lexicon& lex) {
  std::vector<Diagnostic> out;
  for (const auto& phrase : lex.phrases) {
    for (const auto& w : io::split_ws(phrase))
      if (lex.is_stopword(w))
        out.push_back({"phrase-stopword", "phrase '" + phrase + "' contains stopword '" + w + "'"});
  }
  for (const auto& [variant, canonical] : lex.synonyms) {
    if (lex.lemmas.contains(variant))
      out.push_back({"synonym-shadows-lemma",
                     "synonym variant '" + variant + "' is also a lemma key and is never lemmatized"});
  }
  auto check_target = [&](const std::string& form, const std::string& lemma) {
    if (lex.is_stopword(lemma))
      out.push_back({"lemma-stopword", "lemma of '" + form + "' is stopword '" + lemma + "'"});
    if (lemma != form && lex.lemmas.contains(lemma))
      out.push_back({"lemma-chain", "lemma '" + lemma + "' of '" + form + "' is itself a lemma key"});
  };
  for (const auto& [form, lemma] : lex.lemmas.plain) check_target(form, lemma);
  for (const auto& [form, by_pos] : lex.lemmas.tagged)
    for (const auto& [pos, lemma] : by_pos) check_target(form, lemma);
  return out;
}

std::string format_stopwords(const std::set<std::string>& stopwords) {
  std::string out;
  for (const auto& w : stopwords) out += w + "\n";
  return out;
}

std::string format_phrases(const std::vector<std::string>& phrases) {
  std::string out;
  for (const auto& p : phrases) out += p + "\n";
  return out;
}

std::string format_synonyms(const std::map<std::string, std::string>& synonyms) {
  std::string out;
  for (const auto& [v, c] : synonyms) out += v + " => " + c + "\n";
  return out;
}

std::string format_lemmas(const LemmaTable& lemmas) {
  std::string out;
  for (const auto& [form, lemma] : lemmas.plain) out += form + "\t" + lemma + "\n";
  for (const auto& [form, by_pos] : lemmas.tagged)
    for (const auto& [pos, lemma] : by_pos)
      out += form + "\t" + std::string(to_string(pos)) + "\t" + lemma + "\n";
  return out;
}

void write_lexicon(const Lexicon& lex, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file_atomic(dir / "stopwords.txt", format_stopwords(lex.stopwords));
  io::write_file_atomic(dir / "phrases.txt", format_phrases(lex.phrases));
  io::write_file_atomic(dir / "synonyms.txt", format_synonyms(lex.synonyms));
  io::write_file_atomic(dir / "lemmas.tsv", format_lemmas(lex.lemmas));
}

}  // namespace fcm::lexicon
