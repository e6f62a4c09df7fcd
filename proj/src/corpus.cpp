#include "fcm/corpus.hpp"

#include <cctype>
#include <cmath>
#include <unordered_set>

#include "fcm/error.hpp"
#include "fcm/io_util.hpp"
#include "json.hpp"

namespace fcm::corpus {

using nlohmann::json;

const std::vector<std::string>& default_components() {
  static const std::vector<std::string> tags{"annular", "shear_ram", "regulator", "ccsv"};
  return tags;
}

Format format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv" ? Format::csv : Format::jsonl;
}

namespace {

bool valid_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int month = std::stoi(s.substr(5, 2));
  const int day = std::stoi(s.substr(8, 2));
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

// Record-level checks shared by every ingestion path.
void check_record(const FailureRecord& rec, std::size_t line_no, const LoadOptions& options) {
  if (rec.record_id.empty()) throw MalformedRow(line_no, "empty record_id");
  if (rec.component.empty()) throw MalformedRow(line_no, "empty component");
  if (io::trim(rec.description).empty()) throw MalformedRow(line_no, "empty description");
  if (!options.allowed_components.empty()) {
    bool ok = false;
    for (const auto& tag : options.allowed_components) ok = ok || tag == rec.component;
    if (!ok) throw MalformedRow(line_no, "component '" + rec.component + "' not in allow-list");
  }
  if (rec.event_date && !valid_date(*rec.event_date))
    throw MalformedRow(line_no, "event_date '" + *rec.event_date + "' is not YYYY-MM-DD");
  if (rec.downtime_hours && (!std::isfinite(*rec.downtime_hours) || *rec.downtime_hours < 0.0))
    throw MalformedRow(line_no, "downtime_hours must be a non-negative number");
}

std::string required_string(const json& row, const char* key, std::size_t line_no) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) throw MalformedRow(line_no, std::string("missing ") + key);
  if (!it->is_string()) throw MalformedRow(line_no, std::string(key) + " must be a string");
  return it->get<std::string>();
}

// Splits CSV text into rows of fields per RFC 4180. Each row carries the line it starts on.
std::vector<std::pair<std::size_t, std::vector<std::string>>> csv_rows(const std::string& text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> fields;
  std::string field;
  std::size_t line = 1, row_line = 1;
  bool in_quotes = false, field_started = false, row_has_content = false;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    if (row_has_content) {
      end_field();
      rows.emplace_back(row_line, std::move(fields));
    }
    fields.clear();
    field.clear();
    field_started = false;
    row_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      if (!row_has_content) row_line = line;
      in_quotes = true;
      field_started = true;
      row_has_content = true;
    } else if (c == ',') {
      if (!row_has_content) row_line = line;
      row_has_content = true;
      end_field();
    } else if (c == '\r') {
      // CRLF line endings
    } else if (c == '\n') {
      end_row();
      ++line;
    } else {
      if (!row_has_content) row_line = line;
      row_has_content = true;
      field_started = true;
      field.push_back(c);
    }
  }
  if (in_quotes) throw MalformedRow(row_line, "unterminated quoted field");
  end_row();
  return rows;
}

void push_unique(RecordSet& set, std::unordered_set<std::string>& seen, FailureRecord rec) {
  if (!seen.insert(rec.record_id).second) throw DuplicateId(rec.record_id);
  set.records.push_back(std::move(rec));
}

}  // namespace

RecordSet parse_jsonl(const std::string& text, const std::string& label,
                      const LoadOptions& options) {
  RecordSet set;
  set.source_label = label;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string line = io::trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;

    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRow(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!row.is_object()) throw MalformedRow(line_no, "row is not a JSON object");

    FailureRecord rec;
    rec.record_id = required_string(row, "record_id", line_no);
    rec.component = required_string(row, "component", line_no);
    rec.description = required_string(row, "description", line_no);
    if (auto it = row.find("event_date"); it != row.end() && !it->is_null()) {
      if (!it->is_string()) throw MalformedRow(line_no, "event_date must be a string");
      rec.event_date = it->get<std::string>();
    }
    if (auto it = row.find("downtime_hours"); it != row.end() && !it->is_null()) {
      if (!it->is_number()) throw MalformedRow(line_no, "downtime_hours must be a number");
      rec.downtime_hours = it->get<double>();
    }
    check_record(rec, line_no, options);
    push_unique(set, seen, std::move(rec));
  }
  if (set.empty()) throw EmptyFile(label);
  return set;
}

RecordSet parse_csv(const std::string& text, const std::string& label, const LoadOptions& options) {
  auto rows = csv_rows(text);
  if (rows.empty()) throw EmptyFile(label);

  const auto& header = rows.front().second;
  auto column = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (io::trim(header[i]) == name) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  const auto c_id = column("record_id"), c_comp = column("component"),
             c_desc = column("description"), c_date = column("event_date"),
             c_down = column("downtime_hours");
  if (c_id < 0 || c_comp < 0 || c_desc < 0)
    throw MalformedRow(rows.front().first, "header must name record_id, component, description");

  RecordSet set;
  set.source_label = label;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line_no, fields] = rows[r];
    if (fields.size() != header.size())
      throw MalformedRow(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()));
    FailureRecord rec;
    rec.record_id = fields[c_id];
    rec.component = fields[c_comp];
    rec.description = fields[c_desc];
    if (c_date >= 0 && !fields[c_date].empty()) rec.event_date = fields[c_date];
    if (c_down >= 0 && !fields[c_down].empty()) {
      const std::string& raw = fields[c_down];
      std::size_t used = 0;
      try {
        rec.downtime_hours = std::stod(raw, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != raw.size()) throw MalformedRow(line_no, "downtime_hours '" + raw + "' is not a number");
    }
    check_record(rec, line_no, options);
    push_unique(set, seen, std::move(rec));
  }
  if (set.empty()) throw EmptyFile(label);
  return set;
}

RecordSet load_records(const std::filesystem::path& path, Format format,
                       const LoadOptions& options) {
  const std::string text = io::read_file(path);
  return format == Format::csv ? parse_csv(text, path.string(), options)
                               : parse_jsonl(text, path.string(), options);
}

void validate_records(const RecordSet& set, const LoadOptions& options) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    check_record(set.records[i], i + 1, options);
    if (!seen.insert(set.records[i].record_id).second) throw DuplicateId(set.records[i].record_id);
  }
}

std::string to_jsonl(const RecordSet& set) {
  std::string out;
  for (const auto& rec : set.records) {
    json row = json::object();
    row["record_id"] = rec.record_id;
    row["component"] = rec.component;
    row["description"] = rec.description;
    if (rec.event_date) row["event_date"] = *rec.event_date;
    if (rec.downtime_hours) row["downtime_hours"] = *rec.downtime_hours;
    out += row.dump();
    out.push_back('\n');
  }
  return out;
}

namespace {
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}
}  // namespace

std::string to_csv(const RecordSet& set) {
  std::string out = "record_id,component,description,event_date,downtime_hours\r\n";
  for (const auto& rec : set.records) {
    out += csv_field(rec.record_id) + ',' + csv_field(rec.component) + ',' +
           csv_field(rec.description) + ',' + (rec.event_date ? csv_field(*rec.event_date) : "") +
           ',' + (rec.downtime_hours ? io::format_double(*rec.downtime_hours) : "") + "\r\n";
  }
  return out;
}

RecordSet segment_by_component(const RecordSet& set, const std::string& component) {
  if (component.empty()) throw Error(ErrorKind::usage, "EmptyTag", "component tag must be non-empty");
  RecordSet out;
  out.source_label = set.source_label + ":" + component;
  for (const auto& rec : set.records)
    if (rec.component == component) out.records.push_back(rec);
  if (out.empty()) throw EmptySegment(component);
  return out;
}

CorpusStats corpus_stats(const RecordSet& set) {
  CorpusStats stats;
  stats.record_count = set.size();
  std::size_t tokens = 0;
  for (const auto& rec : set.records) {
    ++stats.per_component_counts[rec.component];
    tokens += io::split_ws(rec.description).size();
    if (rec.downtime_hours) stats.total_downtime_hours += *rec.downtime_hours;
  }
  if (stats.record_count > 0)
    stats.mean_token_estimate = static_cast<double>(tokens) / static_cast<double>(stats.record_count);
  return stats;
}

}  // namespace fcm::corpus
