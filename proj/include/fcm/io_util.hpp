#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fcm::io {

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);

/// Incremental SHA-256 over several named parts.
class Digest {
 public:
  Digest();
  ~Digest();
  Digest(const Digest&) = delete;
  Digest& operator=(const Digest&) = delete;

  Digest& add(std::string_view bytes);
  /// Adds a length-prefixed field so concatenation boundaries are unambiguous.
  Digest& add_field(std::string_view name, std::string_view bytes);
  std::string hex();

 private:
  void* ctx_;
};

/// "%.17g" rendering used by every text artifact.
std::string format_double(double value);

std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);

void append_u32_le(std::string& out, std::uint32_t v);
void append_f64_le(std::string& out, double v);
std::uint32_t read_u32_le(const char* p);
double read_f64_le(const char* p);

}  // namespace fcm::io
