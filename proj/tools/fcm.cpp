// fcm: failure-concept mining over maintenance records.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fcm/api_server.hpp"
#include "fcm/concepts.hpp"
#include "fcm/corpus.hpp"
#include "fcm/error.hpp"
#include "fcm/io_util.hpp"
#include "fcm/lexicon.hpp"
#include "fcm/pipeline.hpp"
#include "fcm/preprocess.hpp"
#include "fcm/synthgen.hpp"
#include "fcm/vectorize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fcm;

namespace {

constexpr int kExitUsage = 2, kExitData = 3, kExitNumerical = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return kExitUsage;
    case ErrorKind::numerical: return kExitNumerical;
    case ErrorKind::data:
    case ErrorKind::state: return kExitData;
  }
  return kExitData;
}

// Flag values as parsed; only those given on the command line override the config.
struct Flags {
  std::string run_dir, config_file;
  std::string input, format, component;
  bool any_component = false;
  std::string stopwords, phrases, synonyms, lemmas, lexicon_defaults;
  bool drop_numeric = false;
  double min_df = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  bool exact = false, iterative = false;
  std::size_t terms = 0, docs = 0;
  bool sigma_scaled = false;
};

void add_ingest(CLI::App* cmd, Flags& f) {
  cmd->add_option("--input", f.input, "records file (.jsonl or .csv)");
  cmd->add_option("--format", f.format, "jsonl or csv (default: from extension)");
  cmd->add_option("--component", f.component, "keep only records with this component tag");
  cmd->add_flag("--any-component", f.any_component, "accept any component tag");
}

void add_preprocess(CLI::App* cmd, Flags& f) {
  cmd->add_option("--stopwords", f.stopwords, "stopword file");
  cmd->add_option("--phrases", f.phrases, "phrase file");
  cmd->add_option("--synonyms", f.synonyms, "synonym file");
  cmd->add_option("--lemmas", f.lemmas, "lemma file");
  cmd->add_option("--lexicon-defaults", f.lexicon_defaults, "bundled or minimal");
  cmd->add_flag("--drop-numeric", f.drop_numeric, "drop purely numeric tokens");
}

void add_vectorize(CLI::App* cmd, Flags& f) {
  cmd->add_option("--min-df", f.min_df, "minimum document fraction (default 0.025)");
}

void add_decompose(CLI::App* cmd, Flags& f) {
  cmd->add_option("--k", f.k, "number of concepts (default 10)");
  cmd->add_option("--seed", f.seed, "seed for the iterative solver (default 42)");
  auto* e = cmd->add_flag("--exact", f.exact, "dense Jacobi SVD");
  auto* i = cmd->add_flag("--iterative", f.iterative, "randomized subspace iteration");
  e->excludes(i);
}

void add_report(CLI::App* cmd, Flags& f) {
  cmd->add_option("--terms", f.terms, "terms per concept (default 25)");
  cmd->add_option("--docs", f.docs, "documents per concept (default 10)");
  cmd->add_flag("--sigma-scaled", f.sigma_scaled, "scale loadings by the singular value");
}

bool given(const CLI::App* cmd, const std::string& name) {
  try {
    return cmd->get_option(name)->count() > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

pipeline::Config build_config(const CLI::App* cmd, const Flags& f) {
  pipeline::Config cfg;
  if (!f.config_file.empty()) {
    json j;
    try {
      j = json::parse(io::read_file(f.config_file));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::usage, "BadConfig", "cannot parse " + f.config_file + ": " + e.what());
    }
    cfg.merge_json(j);
  }
  if (given(cmd, "--input")) cfg.input = f.input;
  if (given(cmd, "--format")) cfg.format = f.format;
  if (given(cmd, "--component")) cfg.component = f.component;
  if (given(cmd, "--any-component")) cfg.any_component = f.any_component;
  if (given(cmd, "--stopwords")) cfg.stopwords = f.stopwords;
  if (given(cmd, "--phrases")) cfg.phrases = f.phrases;
  if (given(cmd, "--synonyms")) cfg.synonyms = f.synonyms;
  if (given(cmd, "--lemmas")) cfg.lemmas = f.lemmas;
  if (given(cmd, "--lexicon-defaults")) cfg.lexicon_defaults = f.lexicon_defaults;
  if (given(cmd, "--drop-numeric")) cfg.drop_numeric = f.drop_numeric;
  if (given(cmd, "--min-df")) cfg.min_df = f.min_df;
  if (given(cmd, "--k")) cfg.k = f.k;
  if (given(cmd, "--seed")) cfg.seed = f.seed;
  if (f.exact) cfg.method = "exact";
  if (f.iterative) cfg.method = "iterative";
  if (given(cmd, "--terms")) cfg.terms = f.terms;
  if (given(cmd, "--docs")) cfg.docs = f.docs;
  if (given(cmd, "--sigma-scaled")) cfg.sigma_scaled = f.sigma_scaled;
  return cfg;
}

fs::path run_dir(const Flags& f) {
  if (!f.run_dir.empty()) return f.run_dir;
  if (const char* env = std::getenv("FCM_RUN_DIR"); env && *env) return env;
  throw Error(ErrorKind::usage, "NoRunDir", "no run directory: pass --run DIR or set FCM_RUN_DIR");
}

void print_manifest(const pipeline::RunManifest& m) {
  std::cout << m.run_id << ": ";
  for (std::size_t i = 0; i < m.stages_completed.size(); ++i) std::cout << (i ? " " : "") << m.stages_completed[i];
  std::cout << "\n";
}

struct SynthFlags {
  synthgen::PlantedSpec spec;
  bool fleet = false;
  std::string out, truth, format = "jsonl";
};

void synth(const SynthFlags& s) {
  if (s.out.empty()) throw Error(ErrorKind::usage, "MissingOutput", "synth needs --out");
  corpus::RecordSet records;
  json truth;
  if (s.fleet) {
    auto fleet_corpus = synthgen::generate_fleet_corpus(s.spec.seed);
    records = std::move(fleet_corpus.records);
    truth["components"] = json::object();
    for (const auto& [tag, t] : fleet_corpus.truth) truth["components"][tag] = synthgen::to_json(t);
  } else {
    auto gen = synthgen::generate_corpus(s.spec);
    records = std::move(gen.records);
    truth = synthgen::to_json(gen.truth);
  }
  io::write_file_atomic(s.out, s.format == "csv" ? corpus::to_csv(records) : corpus::to_jsonl(records));
  if (!s.truth.empty()) io::write_file_atomic(s.truth, truth.dump(2) + "\n");
  std::cout << records.records.size() << " records written to " << s.out << "\n";
}

void score(const fs::path& dir, const std::string& truth_file, std::size_t top_n) {
  const auto doc = concepts::concepts_from_json(json::parse(io::read_file(dir / pipeline::kConceptsFile)));
  json tj = json::parse(io::read_file(truth_file));
  if (tj.contains("components")) {
    if (!tj["components"].contains(doc.component))
      throw Error(ErrorKind::data, "NoTruth", "truth file has no component '" + doc.component + "'");
    tj = tj["components"][doc.component];
  }
  const auto truth = synthgen::truth_from_json(tj);
  std::vector<std::vector<std::string>> lists;
  for (const auto& c : doc.concepts) {
    std::vector<std::string> terms;
    for (const auto& l : c.terms) terms.push_back(l.key);
    lists.push_back(std::move(terms));
  }
  std::cout << synthgen::to_json(synthgen::score_recovery(lists, truth, top_n)).dump(2) << "\n";
}

void suggest(const fs::path& dir, const Flags& f, int max_n, double min_df, std::size_t limit) {
  corpus::LoadOptions any;
  any.allowed_components.clear();
  const auto set = corpus::load_records(dir / pipeline::kRecordsFile, corpus::Format::jsonl, any);
  lexicon::LexiconPaths paths;
  if (!f.stopwords.empty()) paths.stopwords = f.stopwords;
  const auto lex = lexicon::load_lexicon(paths);
  std::vector<preprocess::TokenizedDoc> docs;
  for (const auto& r : set.records) {
    preprocess::TokenizedDoc d;
    d.record_id = r.record_id;
    d.tokens = preprocess::drop_stopwords(preprocess::normalize_text(r.description), lex);
    d.token_count = d.tokens.size();
    docs.push_back(std::move(d));
  }
  const auto found = vectorize::suggest_phrases(docs, max_n, min_df);
  for (std::size_t i = 0; i < found.size() && i < limit; ++i)
    std::cout << found[i].phrase << "\t" << found[i].doc_freq << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mine failure concepts from maintenance records"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--run", f.run_dir, "run directory (default: $FCM_RUN_DIR)");
  app.add_option("--config", f.config_file, "JSON config file");

  auto* ingest = app.add_subcommand("ingest", "load and validate records");
  add_ingest(ingest, f);
  auto* prep = app.add_subcommand("preprocess", "tokenize records");
  add_preprocess(prep, f);
  auto* vec = app.add_subcommand("vectorize", "build the TF-IDF matrix");
  add_vectorize(vec, f);
  auto* dec = app.add_subcommand("decompose", "truncated SVD");
  add_decompose(dec, f);
  auto* rep = app.add_subcommand("report", "write concepts.json");
  add_report(rep, f);
  auto* run = app.add_subcommand("run", "all stages in order");
  add_ingest(run, f);
  add_preprocess(run, f);
  add_vectorize(run, f);
  add_decompose(run, f);
  add_report(run, f);

  SynthFlags sf;
  auto* syn = app.add_subcommand("synth", "generate a planted-topic corpus");
  syn->add_option("--topics", sf.spec.n_topics);
  syn->add_option("--terms-per-topic", sf.spec.terms_per_topic);
  syn->add_option("--background", sf.spec.background_terms);
  syn->add_option("--docs", sf.spec.docs);
  syn->add_option("--min-length", sf.spec.doc_length_min);
  syn->add_option("--max-length", sf.spec.doc_length_max);
  syn->add_option("--weight", sf.spec.topic_weight);
  syn->add_option("--component", sf.spec.component_tag);
  syn->add_option("--seed", sf.spec.seed);
  syn->add_flag("--fleet", sf.fleet, "1312 records over the four components");
  syn->add_option("--out", sf.out, "records file")->required();
  syn->add_option("--truth", sf.truth, "ground-truth JSON");
  syn->add_option("--format", sf.format)->check(CLI::IsMember({"jsonl", "csv"}));

  std::string truth_file;
  std::size_t top_n = 10;
  auto* sc = app.add_subcommand("score", "compare concepts.json with planted topics");
  sc->add_option("--truth", truth_file)->required();
  sc->add_option("--top-n", top_n);

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "serve a completed run over HTTP");
  serve->add_option("--port", port);
  serve->add_option("--host", host);

  std::string lex_out;
  auto* dump = app.add_subcommand("lexicon-dump", "write the bundled dictionaries");
  dump->add_option("--out", lex_out)->required();

  int max_n = 2;
  double phrase_df = 0.025;
  std::size_t phrase_limit = 50;
  auto* sug = app.add_subcommand("suggest-phrases", "frequent n-grams in the ingested records");
  sug->add_option("--max-n", max_n)->check(CLI::Range(2, 3));
  sug->add_option("--min-df", phrase_df);
  sug->add_option("--limit", phrase_limit);
  sug->add_option("--stopwords", f.stopwords);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    using pipeline::Stage;
    const std::pair<CLI::App*, Stage> stages[] = {{ingest, Stage::ingest},
                                                  {prep, Stage::preprocess},
                                                  {vec, Stage::vectorize},
                                                  {dec, Stage::decompose},
                                                  {rep, Stage::report}};
    for (const auto& [cmd, stage] : stages)
      if (cmd->parsed()) print_manifest(pipeline::run_stage(stage, build_config(cmd, f), run_dir(f)));
    if (run->parsed()) print_manifest(pipeline::run_all(build_config(run, f), run_dir(f)));
    if (syn->parsed()) synth(sf);
    if (sc->parsed()) score(run_dir(f), truth_file, top_n);
    if (dump->parsed()) {
      lexicon::write_lexicon(lexicon::bundled_lexicon(), lex_out);
      std::cout << "bundled dictionaries written to " << lex_out << "\n";
    }
    if (sug->parsed()) suggest(run_dir(f), f, max_n, phrase_df, phrase_limit);
    if (serve->parsed()) {
      api::Server server(run_dir(f), port, host);
      std::cout << "serving " << run_dir(f).string() << " on http://" << host << ":" << server.port() << "/api/run"
                << std::endl;
      server.wait();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "error: BadJson: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
