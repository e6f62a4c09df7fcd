#include <string>
#include <string_view>
#include <utility>

#include "fcm/lexicon.hpp"

namespace fcm::lexicon {

const std::set<std::string>& bundled_stopwords() {
  // Common English function words (apostrophe forms omitted; normalization
  // splits them into the fragments listed here).
  static const std::set<std::string> words{
      "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
      "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
      "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing",
      "don", "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "has",
      "hasn", "have", "haven", "having", "he", "her", "here", "hers", "herself", "him", "himself",
      "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself", "just", "ll", "m",
      "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor", "not",
      "now", "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves",
      "out", "over", "own", "re", "s", "same", "shan", "she", "should", "shouldn", "so", "some",
      "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there",
      "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "ve",
      "very", "was", "wasn", "we", "were", "weren", "what", "when", "where", "which", "while",
      "who", "whom", "why", "will", "with", "won", "wouldn", "y", "you", "your", "yours",
      "yourself", "yourselves"};
  return words;
}

std::vector<std::string> bundled_phrases() {
  return {"annular element",  "upper annular element", "lower annular element",
          "upper annular",    "lower annular",         "annular piston",
          "annular regulator", "soak test",            "pressure test",
          "function test",    "chamber test",          "bench test",
          "seal plate",       "seal area",             "shear seal",
          "polypak seal",     "lateral seal",          "vent port",
          "vent tube",        "weep hole",             "blind shear ram",
          "casing shear ram", "shear ram",             "ram block",
          "root cause",       "adapter ring",          "spring housing",
          "solenoid bank",    "solenoid valve",        "supply regulator",
          "manifold regulator", "pilot regulator",     "manual regulator",
          "pilot pressure",   "close chamber",         "drill pipe",
          "hydraulic fluid"};
}

std::map<std::string, std::string> bundled_synonyms() {
  return {{"scuff", "scoring"},    {"scuffs", "scoring"},   {"scuffed", "scoring"},
          {"scuffing", "scoring"}, {"scratch", "scoring"},  {"scratches", "scoring"},
          {"scratched", "scoring"}, {"leakage", "leak"},    {"leakages", "leak"},
          {"oring", "o-ring"},     {"orings", "o-ring"}};
}

namespace {

struct Base {
  std::string_view word;
  bool doubles = false;  // final consonant doubles before -ing/-ed/-er
};

constexpr Base kVerbs[] = {
    {"observe"}, {"leak"}, {"replace"}, {"test"}, {"fail"}, {"damage"}, {"function"},
    {"inspect"}, {"change"}, {"remove"}, {"install"}, {"repair"}, {"crack"}, {"check"},
    {"clean"}, {"close"}, {"open"}, {"seal"}, {"report"}, {"pressure"}, {"perform"},
    {"identify"}, {"detect"}, {"notice"}, {"verify"}, {"operate"}, {"activate"}, {"actuate"},
    {"isolate"}, {"disassemble"}, {"assemble"}, {"reassemble"}, {"retest"}, {"return"},
    {"pull"}, {"shear"}, {"vent"}, {"flush"}, {"lubricate"}, {"tighten"}, {"torque"},
    {"adjust"}, {"calibrate"}, {"monitor"}, {"record"}, {"confirm"}, {"require"}, {"start"},
    {"stop", true}, {"plug", true}, {"slip", true}, {"drop", true}, {"trip", true},
    {"clog", true}, {"jam", true}, {"pit", true}, {"chip", true}, {"block"}, {"erode"},
    {"corrode"}, {"degrade"}, {"deteriorate"}, {"extrude"}, {"swell"}, {"rupture"},
    {"fracture"}, {"loosen"}, {"energize"}, {"regulate"}, {"supply"}, {"apply"}, {"try"},
    {"use"}, {"cause"}, {"suspect"}, {"investigate"}, {"troubleshoot"}, {"diagnose"},
    {"power"}, {"connect"}, {"disconnect"}, {"communicate"}, {"measure"}, {"increase"},
    {"decrease"}, {"drift"}, {"fluctuate"}, {"show"}, {"seize"}, {"wash"}, {"overhaul"},
    {"receive"}, {"send"}, {"nibble"}, {"bleed"}, {"charge"}, {"discharge"}, {"indicate"},
    {"respond"}, {"exceed"}, {"lose"}, {"hold"}, {"wear"}, {"tear"}, {"break"}, {"find"},
    {"cut"}, {"run"}, {"split"}, {"bend"}, {"stick"}, {"make"}, {"take"}, {"rebuild"},
    {"reset"}, {"set"}, {"put"}, {"get"}, {"lead"}, {"fall"}, {"freeze"}, {"bring"}};

constexpr Base kNouns[] = {
    {"seal"}, {"leak"}, {"element"}, {"valve"}, {"regulator"}, {"preventer"}, {"ram"},
    {"packer"}, {"piston"}, {"chamber"}, {"spool"}, {"port"}, {"hole"}, {"plate"}, {"ring"},
    {"o-ring"}, {"bolt"}, {"body"}, {"test"}, {"pressure"}, {"failure"}, {"cylinder"},
    {"hose"}, {"line"}, {"fitting"}, {"connector"}, {"cable"}, {"pod"}, {"solenoid"},
    {"accumulator"}, {"pump"}, {"gauge"}, {"sensor"}, {"transducer"}, {"indicator"},
    {"alarm"}, {"reading"}, {"pipe"}, {"rig"}, {"stack"}, {"bonnet"}, {"door"}, {"block"},
    {"insert"}, {"blade"}, {"face"}, {"surface"}, {"spring"}, {"screw"}, {"nut"}, {"gasket"},
    {"shuttle"}, {"filter"}, {"signal"}, {"function"}, {"operation"}, {"component"}, {"part"},
    {"unit"}, {"assembly"}, {"system"}, {"inspection"}, {"replacement"}, {"repair"},
    {"crack"}, {"damage"}, {"box"}, {"bushing"}, {"bearing"}, {"wire"}, {"switch"},
    {"batch"}, {"inch"}, {"loss"}, {"gas"}, {"extrusion"}, {"corrosion"}, {"reason"},
    {"cause"}, {"event"}, {"record"}, {"operator"}, {"well"}, {"hour"}, {"day"}, {"week"},
    {"time"}, {"joint"}, {"kit"}, {"supply"}, {"battery"}, {"activity"}, {"company"},
    {"technician"}, {"crew"}, {"engineer"}, {"housing"}, {"bank"}, {"tube"}, {"area"},
    {"adapter"}, {"vent"}, {"thread"}, {"groove"}, {"lip"}, {"mark"}, {"pit"}, {"chip"},
    {"check"}, {"port"}, {"shear"}, {"leg"}, {"manifold"}, {"subsea"}, {"module"},
    {"computer"}, {"panel"}, {"station"}, {"controller"}, {"circuit"}, {"coil"}, {"fault"},
    {"error"}, {"issue"}, {"problem"}, {"condition"}, {"procedure"}, {"action"}, {"drill"},
    {"casing"}, {"wellbore"}, {"stem"}, {"seat"}, {"shaft"}, {"pin"}, {"clamp"}, {"flange"}};

constexpr Base kAdjectives[] = {
    {"high"}, {"low"}, {"small"}, {"large"}, {"slow"}, {"fast"}, {"hard"}, {"soft"},
    {"weak"}, {"strong"}, {"tight"}, {"loose"}, {"new"}, {"old"}, {"clean"}, {"short"},
    {"long"}, {"deep"}, {"thin", true}, {"wet", true}, {"big", true}, {"hot", true},
    {"early"}, {"easy"}, {"minor"}, {"severe"}};

// form, part of speech, lemma
constexpr std::tuple<std::string_view, Pos, std::string_view> kIrregular[] = {
    {"found", Pos::verb, "find"},     {"broke", Pos::verb, "break"},
    {"broken", Pos::verb, "break"},   {"wore", Pos::verb, "wear"},
    {"worn", Pos::verb, "wear"},      {"tore", Pos::verb, "tear"},
    {"torn", Pos::verb, "tear"},      {"ran", Pos::verb, "run"},
    {"bent", Pos::verb, "bend"},      {"held", Pos::verb, "hold"},
    {"lost", Pos::verb, "lose"},      {"shown", Pos::verb, "show"},
    {"stuck", Pos::verb, "stick"},    {"made", Pos::verb, "make"},
    {"took", Pos::verb, "take"},      {"taken", Pos::verb, "take"},
    {"rebuilt", Pos::verb, "rebuild"}, {"sent", Pos::verb, "send"},
    {"got", Pos::verb, "get"},        {"gotten", Pos::verb, "get"},
    {"led", Pos::verb, "lead"},       {"fell", Pos::verb, "fall"},
    {"fallen", Pos::verb, "fall"},    {"froze", Pos::verb, "freeze"},
    {"frozen", Pos::verb, "freeze"},  {"brought", Pos::verb, "bring"},
    {"bled", Pos::verb, "bleed"},     {"leaves", Pos::noun, "leaf"},
    {"leaves", Pos::verb, "leave"},   {"men", Pos::noun, "man"},
    {"feet", Pos::noun, "foot"},      {"teeth", Pos::noun, "tooth"},
    {"analyses", Pos::noun, "analysis"}, {"diagnoses", Pos::noun, "diagnosis"},
    {"criteria", Pos::noun, "criterion"}, {"better", Pos::adj, "good"},
    {"best", Pos::adj, "good"},       {"worse", Pos::adj, "bad"},
    {"worst", Pos::adj, "bad"}};

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool consonant_y(std::string_view w) {
  return w.size() >= 2 && w.back() == 'y' && !is_vowel(w[w.size() - 2]);
}

std::string plural(std::string_view w) {
  std::string s(w);
  if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
      ends_with(w, "sh"))
    return s + "es";
  if (consonant_y(w)) return s.substr(0, s.size() - 1) + "ies";
  return s + "s";
}

std::string gerund(const Base& b) {
  std::string s(b.word);
  if (b.doubles) return s + s.back() + "ing";
  if (ends_with(s, "ie")) return s.substr(0, s.size() - 2) + "ying";
  if (ends_with(s, "e") && !ends_with(s, "ee") && !ends_with(s, "ye") && !ends_with(s, "oe"))
    return s.substr(0, s.size() - 1) + "ing";
  return s + "ing";
}

std::string past(const Base& b) {
  std::string s(b.word);
  if (b.doubles) return s + s.back() + "ed";
  if (ends_with(s, "e")) return s + "d";
  if (consonant_y(s)) return s.substr(0, s.size() - 1) + "ied";
  return s + "ed";
}

std::pair<std::string, std::string> degrees(const Base& b) {
  std::string s(b.word);
  if (b.doubles) return {s + s.back() + "er", s + s.back() + "est"};
  if (ends_with(s, "e")) return {s + "r", s + "st"};
  if (consonant_y(s)) {
    auto stem = s.substr(0, s.size() - 1);
    return {stem + "ier", stem + "iest"};
  }
  return {s + "er", s + "est"};
}

// Verbs whose past forms are irregular; their regular -ed form is not generated.
bool irregular_past(std::string_view w) {
  for (auto v : {"lose", "hold", "wear", "tear", "break", "find", "cut", "run", "split", "bend",
                 "stick", "make", "take", "rebuild", "reset", "set", "put", "get", "lead",
                 "fall", "freeze", "bring", "send", "bleed"})
    if (w == v) return true;
  return false;
}

// Verbs whose gerund doubles the final consonant although they are not marked above.
bool doubles_for_gerund(std::string_view w) {
  for (auto v : {"cut", "run", "split", "set", "reset", "put", "get"})
    if (w == v) return true;
  return false;
}

}  // namespace

LemmaTable bundled_lemmas() {
  std::map<std::string, std::map<Pos, std::string>> forms;
  std::set<std::string> lemmas;
  auto add = [&](std::string form, Pos pos, std::string_view lemma) {
    if (form != lemma) forms[std::move(form)].emplace(pos, std::string(lemma));
  };

  for (const auto& v : kVerbs) {
    lemmas.emplace(v.word);
    add(plural(v.word), Pos::verb, v.word);
    Base g = v;
    g.doubles = v.doubles || doubles_for_gerund(v.word);
    add(gerund(g), Pos::verb, v.word);
    if (!irregular_past(v.word)) add(past(v), Pos::verb, v.word);
  }
  for (const auto& n : kNouns) {
    lemmas.emplace(n.word);
    add(plural(n.word), Pos::noun, n.word);
  }
  for (const auto& a : kAdjectives) {
    lemmas.emplace(a.word);
    auto [comparative, superlative] = degrees(a);
    add(comparative, Pos::adj, a.word);
    add(superlative, Pos::adj, a.word);
  }
  for (const auto& [form, pos, lemma] : kIrregular) {
    lemmas.emplace(lemma);
    add(std::string(form), pos, lemma);
  }

  const auto synonyms = bundled_synonyms();
  const auto& stop = bundled_stopwords();
  LemmaTable table;
  for (auto& [form, by_pos] : forms) {
    // A form that is itself a lemma stays put so lemmatization is a fixpoint.
    if (lemmas.count(form) || synonyms.count(form) || stop.count(form)) continue;
    bool agree = true;
    for (const auto& [pos, lemma] : by_pos) agree = agree && lemma == by_pos.begin()->second;
    if (agree)
      table.plain.emplace(form, by_pos.begin()->second);
    else
      table.tagged.emplace(form, by_pos);
  }
  return table;
}

Lexicon bundled_lexicon() {
  Lexicon lex;
  lex.stopwords = bundled_stopwords();
  lex.phrases = bundled_phrases();
  lex.synonyms = bundled_synonyms();
  lex.lemmas = bundled_lemmas();
  return lex;
}

}  // namespace fcm::lexicon
