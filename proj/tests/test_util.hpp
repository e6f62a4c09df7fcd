#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "fcm/io_util.hpp"

namespace fcm::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("fcm-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    io::write_file_atomic(p, content);
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(FCM_TEST_DATA) / name; }

}  // namespace fcm::testing
