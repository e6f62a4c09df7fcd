#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "fcm/concepts.hpp"
#include "json.hpp"

namespace fcm::api {

/// Analyst labels for one run, persisted as labels.json beside the run.
struct LabelStore {
  std::string run_id;
  std::uint64_t revision = 0;
  std::map<std::string, std::map<std::string, concepts::Facet>> labels;  // concept -> term -> facet
  std::map<std::string, std::string> scenario_notes;                    // concept -> narrative

  nlohmann::ordered_json to_json() const;
  static LabelStore from_json(const nlohmann::json& j);
};

/// Loads labels.json, or an empty store for `run_id` when absent.
LabelStore load_labels(const std::filesystem::path& run_dir, const std::string& run_id);
void save_labels(const std::filesystem::path& run_dir, const LabelStore& store);

/// Immutable view over a completed run.
struct RunView {
  nlohmann::ordered_json manifest;
  concepts::ConceptsDocument document;
  concepts::ConceptModel model;  // full loadings, for limits beyond what concepts.json lists
  std::map<std::string, nlohmann::ordered_json> records;  // record_id -> record

  /// Throws RunNotFound when the report stage has not produced concepts.json.
  static RunView load(const std::filesystem::path& run_dir);
  /// Index of a concept by display name, if any.
  std::optional<std::size_t> find_concept(const std::string& name) const;
};

/// A running HTTP service over one run directory.
class Server {
 public:
  /// Binds `host:port` (port 0 picks a free port) and starts serving on a
  /// background thread. Throws RunNotFound or PortInUse.
  Server(const std::filesystem::path& run_dir, int port, const std::string& host = "127.0.0.1");
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const;
  /// Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fcm::api
