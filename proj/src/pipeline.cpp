#include "fcm/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <ctime>

#include "fcm/concepts.hpp"
#include "fcm/corpus.hpp"
#include "fcm/error.hpp"
#include "fcm/io_util.hpp"
#include "fcm/lexicon.hpp"
#include "fcm/preprocess.hpp"
#include "fcm/svd.hpp"
#include "fcm/vectorize.hpp"

namespace fcm::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest: return "ingest";
    case Stage::preprocess: return "preprocess";
    case Stage::vectorize: return "vectorize";
    case Stage::decompose: return "decompose";
    case Stage::report: return "report";
  }
  return "ingest";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (Stage st : kStages)
    if (to_string(st) == s) return st;
  return std::nullopt;
}

namespace {

Error bad_config(const std::string& why) { return Error(ErrorKind::usage, "BadConfig", why); }

std::optional<fs::path> opt_path(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return fs::path(j[key].get<std::string>());
}

json path_or_null(const std::optional<fs::path>& p) {
  return p ? json(fs::absolute(*p).lexically_normal().string()) : json();
}

}  // namespace

void Config::merge_json(const json& j) {
  if (!j.is_object()) throw bad_config("configuration must be a JSON object");
  static const std::vector<std::string> known{
      "input", "format", "component", "allowed_components", "any_component", "stopwords", "phrases",
      "synonyms", "lemmas", "lexicon_defaults", "drop_numeric", "min_df", "k", "seed", "method",
      "terms", "docs", "sigma_scaled"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw bad_config("unknown config key '" + key + "'");
  try {
    if (auto p = opt_path(j, "input")) input = p;
    if (j.contains("format")) format = j["format"].get<std::string>();
    if (j.contains("component")) component = j["component"].get<std::string>();
    if (j.contains("allowed_components")) allowed_components = j["allowed_components"].get<std::vector<std::string>>();
    if (j.contains("any_component")) any_component = j["any_component"].get<bool>();
    if (auto p = opt_path(j, "stopwords")) stopwords = p;
    if (auto p = opt_path(j, "phrases")) phrases = p;
    if (auto p = opt_path(j, "synonyms")) synonyms = p;
    if (auto p = opt_path(j, "lemmas")) lemmas = p;
    if (j.contains("lexicon_defaults")) lexicon_defaults = j["lexicon_defaults"].get<std::string>();
    if (j.contains("drop_numeric")) drop_numeric = j["drop_numeric"].get<bool>();
    if (j.contains("min_df")) min_df = j["min_df"].get<double>();
    if (j.contains("k")) k = j["k"].get<std::size_t>();
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("method")) method = j["method"].get<std::string>();
    if (j.contains("terms")) terms = j["terms"].get<std::size_t>();
    if (j.contains("docs")) docs = j["docs"].get<std::size_t>();
    if (j.contains("sigma_scaled")) sigma_scaled = j["sigma_scaled"].get<bool>();
  } catch (const json::exception& e) {
    throw bad_config(std::string("bad config value: ") + e.what());
  }
}

ordered_json Config::stage_json(Stage stage) const {
  switch (stage) {
    case Stage::ingest: {
      const auto& allowed = allowed_components.empty() ? corpus::default_components() : allowed_components;
      return {{"input", path_or_null(input)},
              {"format", format ? json(*format) : json()},
              {"component", component ? json(*component) : json()},
              {"allowed_components", any_component ? json::array() : json(allowed)}};
    }
    case Stage::preprocess:
      return {{"stopwords", path_or_null(stopwords)}, {"phrases", path_or_null(phrases)},
              {"synonyms", path_or_null(synonyms)},   {"lemmas", path_or_null(lemmas)},
              {"lexicon_defaults", lexicon_defaults}, {"drop_numeric", drop_numeric}};
    case Stage::vectorize:
      return {{"min_df", min_df}};
    case Stage::decompose:
      return {{"k", k}, {"seed", seed}, {"method", method}};
    case Stage::report:
      return {{"terms", terms}, {"docs", docs}, {"sigma_scaled", sigma_scaled}};
  }
  return ordered_json::object();
}

bool RunManifest::completed(Stage stage) const {
  return std::find(stages_completed.begin(), stages_completed.end(), std::string(to_string(stage))) !=
         stages_completed.end();
}

namespace {

// Pipeline order regardless of how the snapshot was filled.
ordered_json ordered_snapshot(const ordered_json& snapshot) {
  ordered_json out = ordered_json::object();
  for (Stage s : kStages) {
    const std::string name(to_string(s));
    if (snapshot.contains(name)) out[name] = snapshot[name];
  }
  return out;
}

}  // namespace

ordered_json RunManifest::to_json() const {
  return {{"run_id", run_id},
          {"tool_version", tool_version},
          {"stages_completed", stages_completed},
          {"config_snapshot", ordered_snapshot(config_snapshot)},
          {"input_digest", input_digest},
          {"completed_at", completed_at}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.run_id = j.value("run_id", "");
  m.tool_version = j.value("tool_version", std::string(kToolVersion));
  m.stages_completed = j.value("stages_completed", std::vector<std::string>{});
  if (j.contains("config_snapshot")) m.config_snapshot = j["config_snapshot"];
  m.input_digest = j.value("input_digest", std::map<std::string, std::string>{});
  m.completed_at = j.value("completed_at", std::map<std::string, std::string>{});
  return m;
}

RunManifest read_manifest(const fs::path& run_dir) {
  const auto path = run_dir / kManifestFile;
  if (!fs::exists(path)) return {};
  return RunManifest::from_json(json::parse(io::read_file(path)));
}

RunLock::RunLock(const fs::path& run_dir) : path_(run_dir / ".lock") {
  fs::create_directories(run_dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST)
      throw Error(ErrorKind::state, "RunLocked", "run directory '" + run_dir.string() + "' is locked by another writer");
    throw Error(ErrorKind::state, "RunLocked", "cannot create lock: " + std::string(std::strerror(errno)));
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

namespace {

// File contents, or a marker when the file is absent, so deletions change the digest.
std::string file_or_marker(const fs::path& p) {
  if (!fs::exists(p)) return "\x01missing:" + p.filename().string();
  return io::read_file(p);
}

lexicon::Lexicon lexicon_for(const json& cfg) {
  lexicon::LexiconPaths paths;
  paths.stopwords = opt_path(cfg, "stopwords");
  paths.phrases = opt_path(cfg, "phrases");
  paths.synonyms = opt_path(cfg, "synonyms");
  paths.lemmas = opt_path(cfg, "lemmas");
  auto lex = lexicon::load_lexicon(paths);
  const std::string defaults = cfg.value("lexicon_defaults", "bundled");
  if (defaults == "bundled") {
    if (!paths.phrases) lex.phrases = lexicon::bundled_phrases();
    if (!paths.synonyms) lex.synonyms = lexicon::bundled_synonyms();
    if (!paths.lemmas) lex.lemmas = lexicon::bundled_lemmas();
  } else if (defaults != "minimal") {
    throw bad_config("lexicon_defaults must be 'bundled' or 'minimal'");
  }
  return lex;
}

// SOURCE_DATE_EPOCH, when set, replaces the clock (reproducible-builds convention).
std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0' && v >= 0) now = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  ::gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& p, const ordered_json& j) { io::write_file_atomic(p, j.dump(2) + "\n"); }

corpus::RecordSet read_run_records(const fs::path& run_dir) {
  corpus::LoadOptions any;
  any.allowed_components.clear();
  return corpus::load_records(run_dir / kRecordsFile, corpus::Format::jsonl, any);
}

void do_ingest(const json& cfg, const fs::path& run_dir) {
  const auto input = opt_path(cfg, "input");
  if (!input) throw Error(ErrorKind::usage, "MissingInput", "ingest needs --input");
  corpus::LoadOptions options;
  options.allowed_components = cfg["allowed_components"].get<std::vector<std::string>>();
  corpus::Format format = corpus::format_from_path(*input);
  if (cfg.contains("format") && !cfg["format"].is_null()) {
    const auto f = cfg["format"].get<std::string>();
    if (f == "csv")
      format = corpus::Format::csv;
    else if (f == "jsonl")
      format = corpus::Format::jsonl;
    else
      throw bad_config("format must be 'jsonl' or 'csv'");
  }
  auto set = corpus::load_records(*input, format, options);
  set.source_label = input->filename().string();
  if (cfg.contains("component") && !cfg["component"].is_null())
    set = corpus::segment_by_component(set, cfg["component"].get<std::string>());

  const auto stats = corpus::corpus_stats(set);
  ordered_json s{{"source_label", set.source_label},
                 {"record_count", stats.record_count},
                 {"per_component_counts", stats.per_component_counts},
                 {"mean_token_estimate", stats.mean_token_estimate},
                 {"total_downtime_hours", stats.total_downtime_hours}};
  io::write_file_atomic(run_dir / kRecordsFile, corpus::to_jsonl(set));
  write_json(run_dir / kStatsFile, s);
}

void do_preprocess(const json& cfg, const fs::path& run_dir) {
  const auto set = read_run_records(run_dir);
  const auto lex = lexicon_for(cfg);
  preprocess::Options options;
  options.drop_numeric = cfg.value("drop_numeric", false);
  const auto result = preprocess::preprocess_corpus(set, lex, options);

  ordered_json diagnostics = ordered_json::array();
  for (const auto& d : lexicon::validate_lexicon(lex)) diagnostics.push_back({{"code", d.code}, {"message", d.message}});
  std::size_t tokens = 0;
  for (const auto& doc : result.docs) tokens += doc.token_count;
  ordered_json report{{"n_docs", result.docs.size()},
                      {"total_tokens", tokens},
                      {"empty_records", result.empty_records},
                      {"lexicon_diagnostics", diagnostics}};
  io::write_file_atomic(run_dir / kTokensFile, preprocess::format_token_dump(result.docs));
  write_json(run_dir / kPreprocessReport, report);
}

void do_vectorize(const json& cfg, const fs::path& run_dir) {
  const auto docs = preprocess::parse_token_dump(io::read_file(run_dir / kTokensFile));
  const double min_df = cfg.at("min_df").get<double>();
  const auto model = vectorize::build_tfidf(docs, min_df);
  ordered_json terms = ordered_json::array();
  for (std::size_t i = 0; i < model.vocab.size(); ++i)
    terms.push_back({{"term", model.vocab.terms[i]}, {"doc_freq", model.vocab.doc_freq[i]}, {"idf", model.idf[i]}});
  ordered_json vocab{{"n_docs", model.n_docs},
                     {"min_df", min_df},
                     {"min_doc_count", vectorize::min_doc_count(min_df, model.n_docs)},
                     {"terms", std::move(terms)}};
  write_json(run_dir / kVocabFile, vocab);
  io::write_file_atomic(run_dir / kMatrixFile, vectorize::encode_matrix(model.matrix));
}

void do_decompose(const json& cfg, const fs::path& run_dir) {
  const auto matrix = vectorize::decode_matrix(io::read_file(run_dir / kMatrixFile));
  const auto k = cfg.at("k").get<std::size_t>();
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto method = cfg.at("method").get<std::string>();
  if (k < 1) throw bad_config("k must be >= 1");
  if (method != "auto" && method != "exact" && method != "iterative")
    throw bad_config("method must be auto, exact or iterative");

  svd::Options options;
  const std::size_t full = std::min(matrix.rows, matrix.cols);
  if (k > full) throw KTooLarge(k, full);
  const bool exact = method == "exact" || (method == "auto" && full <= options.dense_cap);
  svd::SvdFactors factors;
  if (exact) {
    const auto all = svd::svd_exact(matrix.to_dense(), options);
    const std::size_t rank = svd::numerical_rank(all.s);
    factors = svd::truncate(all, std::min(k, rank));
    factors.rank_deficient = rank < k;
  } else {
    factors = svd::svd_truncated(matrix, k, seed, options);
  }
  fs::remove_all(run_dir / kFactorsDir);
  svd::write_factors(factors, run_dir / kFactorsDir);
}

void do_report(const json& cfg, const fs::path& run_dir) {
  const auto factors = svd::read_factors(run_dir / kFactorsDir);
  const auto vocab = json::parse(io::read_file(run_dir / kVocabFile));
  std::vector<std::string> terms;
  for (const auto& t : vocab.at("terms")) terms.push_back(t.at("term").get<std::string>());
  std::vector<std::string> ids;
  for (const auto& doc : preprocess::parse_token_dump(io::read_file(run_dir / kTokensFile))) ids.push_back(doc.record_id);

  std::string component = "all";
  const auto records = read_run_records(run_dir);
  if (std::all_of(records.records.begin(), records.records.end(),
                  [&](const auto& r) { return r.component == records.records.front().component; }))
    component = records.records.front().component;

  const auto model = concepts::build_concept_model(factors, factors.m, std::move(terms), std::move(ids), component);
  concepts::ExportOptions options;
  options.term_limit = cfg.at("terms").get<std::size_t>();
  options.doc_limit = cfg.at("docs").get<std::size_t>();
  options.sigma_scaled = cfg.at("sigma_scaled").get<bool>();
  if (options.term_limit < 1 || options.doc_limit < 1) throw bad_config("terms and docs must be >= 1");
  write_json(run_dir / kConceptsFile, concepts::to_json(concepts::export_concepts(model, options)));
}

// Outputs each stage must leave behind for a rerun to count as a no-op.
std::vector<fs::path> stage_outputs(Stage stage, const fs::path& run_dir) {
  switch (stage) {
    case Stage::ingest: return {run_dir / kRecordsFile, run_dir / kStatsFile};
    case Stage::preprocess: return {run_dir / kTokensFile, run_dir / kPreprocessReport};
    case Stage::vectorize: return {run_dir / kVocabFile, run_dir / kMatrixFile};
    case Stage::decompose: return {run_dir / kFactorsDir / "manifest.json"};
    case Stage::report: return {run_dir / kConceptsFile};
  }
  return {};
}

RunManifest run_stage_locked(Stage stage, const Config& config, const fs::path& run_dir) {
  RunManifest manifest = read_manifest(run_dir);
  for (Stage prior : kStages) {
    if (prior == stage) break;
    const std::string name(to_string(prior));
    if (!manifest.completed(prior)) throw MissingPrerequisite(name);
    for (const auto& out : stage_outputs(prior, run_dir))
      if (!fs::exists(out)) throw StaleArtifact(name);
    if (stage_digest(prior, manifest.config_snapshot[name], run_dir) != manifest.input_digest[name])
      throw StaleArtifact(name);
  }

  const std::string name(to_string(stage));
  const ordered_json cfg = config.stage_json(stage);
  const std::string digest = stage_digest(stage, cfg, run_dir);
  const auto outputs = stage_outputs(stage, run_dir);
  const bool outputs_present = std::all_of(outputs.begin(), outputs.end(), [](const auto& p) { return fs::exists(p); });
  if (manifest.completed(stage) && manifest.input_digest[name] == digest && outputs_present) return manifest;

  switch (stage) {
    case Stage::ingest: do_ingest(cfg, run_dir); break;
    case Stage::preprocess: do_preprocess(cfg, run_dir); break;
    case Stage::vectorize: do_vectorize(cfg, run_dir); break;
    case Stage::decompose: do_decompose(cfg, run_dir); break;
    case Stage::report: do_report(cfg, run_dir); break;
  }

  if (stage == Stage::ingest) manifest.run_id = "run-" + digest.substr(0, 12);
  manifest.config_snapshot[name] = cfg;
  manifest.input_digest[name] = digest;
  manifest.completed_at[name] = utc_now();
  manifest.tool_version = std::string(kToolVersion);
  std::vector<std::string> ordered;
  for (Stage s : kStages)
    if (s == stage || manifest.completed(s)) ordered.emplace_back(to_string(s));
  manifest.stages_completed = std::move(ordered);
  write_json(run_dir / kManifestFile, manifest.to_json());
  return manifest;
}

}  // namespace

std::string stage_digest(Stage stage, const json& cfg, const fs::path& run_dir) {
  io::Digest d;
  d.add_field("stage", to_string(stage));
  d.add_field("config", cfg.dump());
  switch (stage) {
    case Stage::ingest:
      if (auto input = opt_path(cfg, "input")) d.add_field("input", file_or_marker(*input));
      break;
    case Stage::preprocess:
      d.add_field("records", file_or_marker(run_dir / kRecordsFile));
      for (const char* key : {"stopwords", "phrases", "synonyms", "lemmas"})
        if (auto p = opt_path(cfg, key)) d.add_field(key, file_or_marker(*p));
      break;
    case Stage::vectorize:
      d.add_field("tokens", file_or_marker(run_dir / kTokensFile));
      break;
    case Stage::decompose:
      d.add_field("matrix", file_or_marker(run_dir / kMatrixFile));
      break;
    case Stage::report:
      for (const char* f : {"manifest.json", "g.f64", "s.f64", "d.f64"})
        d.add_field(f, file_or_marker(run_dir / kFactorsDir / f));
      d.add_field("vocab", file_or_marker(run_dir / kVocabFile));
      d.add_field("tokens", file_or_marker(run_dir / kTokensFile));
      d.add_field("records", file_or_marker(run_dir / kRecordsFile));
      break;
  }
  return d.hex();
}

RunManifest run_stage(Stage stage, const Config& config, const fs::path& run_dir) {
  RunLock lock(run_dir);
  return run_stage_locked(stage, config, run_dir);
}

RunManifest run_all(const Config& config, const fs::path& run_dir) {
  RunLock lock(run_dir);
  RunManifest manifest;
  for (Stage s : kStages) manifest = run_stage_locked(s, config, run_dir);
  return manifest;
}

}  // namespace fcm::pipeline
