#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fcm::pipeline {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Stage { ingest, preprocess, vectorize, decompose, report };

inline constexpr Stage kStages[] = {Stage::ingest, Stage::preprocess, Stage::vectorize, Stage::decompose,
                                    Stage::report};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view s);

/// Effective configuration of a run. Defaults: min_df 0.025, k 10, 25 terms, seed 42.
struct Config {
  // ingest
  std::optional<std::filesystem::path> input;
  std::optional<std::string> format;     // "jsonl" | "csv"; guessed from the extension when unset
  std::optional<std::string> component;  // segment to keep; all records when unset
  std::vector<std::string> allowed_components;  // empty: the default four
  bool any_component = false;                   // disable the allow-list
  // preprocess
  std::optional<std::filesystem::path> stopwords, phrases, synonyms, lemmas;
  /// "bundled" fills unspecified dictionaries with the bundled defaults;
  /// "minimal" leaves them empty (stopwords still fall back to the bundled list).
  std::string lexicon_defaults = "bundled";
  bool drop_numeric = false;
  // vectorize
  double min_df = 0.025;
  // decompose
  std::size_t k = 10;
  std::uint64_t seed = 42;
  std::string method = "auto";  // "auto" | "exact" | "iterative"
  // report
  std::size_t terms = 25;
  std::size_t docs = 10;
  bool sigma_scaled = false;

  /// Overlays keys present in `j` (same names as the fields); unknown keys are rejected.
  void merge_json(const nlohmann::json& j);
  /// The subset of fields a stage depends on.
  nlohmann::ordered_json stage_json(Stage stage) const;
};

/// Bookkeeping stored as manifest.json in the run directory.
struct RunManifest {
  std::string run_id;
  std::vector<std::string> stages_completed;  // pipeline order
  nlohmann::ordered_json config_snapshot = nlohmann::ordered_json::object();  // stage -> config
  std::map<std::string, std::string> input_digest;                             // stage -> sha256
  std::map<std::string, std::string> completed_at;                             // stage -> UTC time
  std::string tool_version{kToolVersion};

  bool completed(Stage stage) const;
  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// Reads manifest.json; an absent file yields an empty manifest.
RunManifest read_manifest(const std::filesystem::path& run_dir);

/// Runs one stage. Rerunning a stage whose inputs are unchanged is a no-op.
/// Throws MissingPrerequisite or StaleArtifact for earlier stages.
RunManifest run_stage(Stage stage, const Config& config, const std::filesystem::path& run_dir);

/// All five stages in order.
RunManifest run_all(const Config& config, const std::filesystem::path& run_dir);

/// Content hash of everything `stage` reads, given that stage's recorded config.
std::string stage_digest(Stage stage, const nlohmann::json& stage_config, const std::filesystem::path& run_dir);

/// Exclusive lock on a run directory, released on destruction.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Artifact names inside a run directory.
inline constexpr const char* kRecordsFile = "records.jsonl";
inline constexpr const char* kStatsFile = "stats.json";
inline constexpr const char* kTokensFile = "tokens.tsv";
inline constexpr const char* kPreprocessReport = "preprocess.json";
inline constexpr const char* kVocabFile = "vocab.json";
inline constexpr const char* kMatrixFile = "tfidf.bin";
inline constexpr const char* kFactorsDir = "factors";
inline constexpr const char* kConceptsFile = "concepts.json";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kLabelsFile = "labels.json";

}  // namespace fcm::pipeline
