#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

namespace testutil {

// Unique scratch directory, removed with everything in it on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / (tag + "." + std::to_string(::getpid()) + "." +
                               std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& bytes) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Published summary triples {bravo, semantic, ood} used as regression
// anchors for the harmonic-mean aggregation.
inline constexpr double kSummaryAnchors[18][3] = {
    {77.9, 69.8, 88.1}, {77.2, 70.8, 84.8}, {76.1, 70.0, 83.4},
    {75.5, 70.5, 81.4}, {69.9, 69.1, 70.6}, {67.8, 57.1, 83.5},
    {64.5, 49.7, 92.1}, {63.5, 69.4, 58.5}, {61.2, 58.7, 64.0},
    {61.1, 64.3, 58.2}, {59.9, 67.3, 53.9}, {59.4, 46.1, 83.5},
    {54.1, 62.8, 47.6}, {53.5, 40.4, 79.1}, {47.1, 45.3, 49.2},
    {45.3, 51.5, 40.5}, {37.7, 27.7, 59.2}, {33.6, 66.3, 22.5},
};

}  // namespace testutil
