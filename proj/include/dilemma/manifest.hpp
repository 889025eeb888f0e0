#ifndef DILEMMA_MANIFEST_HPP
#define DILEMMA_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace dilemma {

inline constexpr std::string_view kEngineVersion = "0.1.0";

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);

// ISO 8601 UTC, second resolution.
std::string UtcTimestamp();

struct ManifestOutput {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

// Written as manifest.json next to the data files of one command run.
struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_digest;  // SHA-256 of the effective config text
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  std::string engine_version{kEngineVersion};
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestOutput> outputs;

  nlohmann::json ToJson() const;
};

// Collects data files for one output directory and writes them together
// with the manifest.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);

  void Write(const std::string& name, std::string_view contents);
  // Sets finished_at, copies the outputs and writes manifest.json.
  void Finish(RunManifest manifest);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<ManifestOutput> outputs_;
};

}  // namespace dilemma

#endif  // DILEMMA_MANIFEST_HPP
