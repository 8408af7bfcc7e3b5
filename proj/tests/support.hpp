#pragma once
#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "s4/error.hpp"

namespace testing {

template <typename F>
s4::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const s4::Error& e) {
    return e.kind();
  }
  FAIL("expected an s4::Error");
  return s4::ErrorKind::kInvalidArgument;
}

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("s4-test-" + std::to_string(rd()) + std::to_string(rd()));
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

 private:
  std::filesystem::path path_;
};

}  // namespace testing
