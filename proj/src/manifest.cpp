#include "dilemma/manifest.hpp"

#include <chrono>
#include <ctime>
#include <stdexcept>

#include <openssl/evp.h>

#include "dilemma/io.hpp"

namespace dilemma {

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string UtcTimestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

nlohmann::json RunManifest::ToJson() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const ManifestOutput& o : outputs) {
    outs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
  }
  return {{"schema_version", 1},
          {"command", command},
          {"config_path", config_path},
          {"config_digest", config_digest},
          {"master_seed", master_seed},
          {"threads", threads},
          {"engine_version", engine_version},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"outputs", std::move(outs)}};
}

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir_.string() + "': " + ec.message());
}

void OutputDir::Write(const std::string& name, std::string_view contents) {
  WriteTextFile(dir_ / name, contents);
  outputs_.push_back({name, Sha256Hex(contents), contents.size()});
}

void OutputDir::Finish(RunManifest manifest) {
  manifest.finished_at = UtcTimestamp();
  manifest.outputs = outputs_;
  WriteTextFile(dir_ / "manifest.json", manifest.ToJson().dump(2) + "\n");
}

}  // namespace dilemma
