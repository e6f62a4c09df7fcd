#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fcm::corpus {

/// One corrective-maintenance event.
struct FailureRecord {
  std::string record_id;
  std::string component;
  std::string description;
  std::optional<std::string> event_date;  // YYYY-MM-DD
  std::optional<double> downtime_hours;

  bool operator==(const FailureRecord&) const = default;
};

/// Records in insertion order; a record's position is its document index.
struct RecordSet {
  std::vector<FailureRecord> records;
  std::string source_label;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct CorpusStats {
  std::size_t record_count = 0;
  std::map<std::string, std::size_t> per_component_counts;
  double mean_token_estimate = 0.0;
  double total_downtime_hours = 0.0;
};

enum class Format { jsonl, csv };

/// The four components analyzed in the original study.
const std::vector<std::string>& default_components();

struct LoadOptions {
  /// Accepted component tags; empty accepts any tag.
  std::vector<std::string> allowed_components = default_components();
};

/// Guesses the format from the file extension (".csv" -> csv, otherwise jsonl).
Format format_from_path(const std::filesystem::path& path);

/// Throws MalformedRow, DuplicateId or EmptyFile.
RecordSet load_records(const std::filesystem::path& path, Format format,
                       const LoadOptions& options = {});

/// Parses JSONL text already in memory; `label` names the source in errors.
RecordSet parse_jsonl(const std::string& text, const std::string& label,
                      const LoadOptions& options = {});
RecordSet parse_csv(const std::string& text, const std::string& label,
                    const LoadOptions& options = {});

/// Checks every record invariant plus id uniqueness; line numbers are 1-based positions.
void validate_records(const RecordSet& set, const LoadOptions& options = {});

std::string to_jsonl(const RecordSet& set);
std::string to_csv(const RecordSet& set);

/// Throws EmptySegment when no record carries `component`.
RecordSet segment_by_component(const RecordSet& set, const std::string& component);

CorpusStats corpus_stats(const RecordSet& set);

}  // namespace fcm::corpus
