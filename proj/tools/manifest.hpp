#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hgnids::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// manifest.json of one run directory. It is written with status "running"
/// before any artifact, and rewritten with "ok" or "failed" at the end.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir, std::uint64_t seed,
              std::string config_snapshot, std::vector<std::string> argv);

  const std::filesystem::path& out_dir() const { return out_dir_; }

  void add_input(const std::filesystem::path& path);
  void begin();
  void finish_ok();
  void finish_failed(const std::string& message);

  static constexpr const char* kFileName = "manifest.json";

 private:
  void write(const std::string& status, const std::string& error) const;

  struct Input {
    std::string path;
    std::string sha256;
  };

  std::string command_;
  std::filesystem::path out_dir_;
  std::uint64_t seed_;
  std::string config_;
  std::vector<std::string> argv_;
  std::vector<Input> inputs_;
};

}  // namespace hgnids::cli
