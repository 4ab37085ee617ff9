// Per-test scratch directories under the process working directory.
#pragma once

#include <filesystem>
#include <string>

namespace testutil {

// Fresh empty directory, wiped at construction so reruns start clean.
struct ScratchDir {
  std::filesystem::path path;

  explicit ScratchDir(const std::string& name)
      : path(std::filesystem::current_path() / "scratch" / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }

  std::string file(const std::string& leaf) const { return (path / leaf).string(); }
};

}  // namespace testutil
