#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace forge::manifest {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kToolVersion = "0.1.0";

// One manifest per run; enough to re-run the command bit-identically with
// stub backends (timestamp aside).
struct RunManifest {
  std::string command;                               // subcommand + flags
  std::string config_digest;                         // digest of effective config
  std::map<std::string, std::string> input_digests;  // input path -> digest
  std::int64_t seed = 0;
  std::string timestamp;  // UTC ISO-8601
  std::string tool_version = std::string(kToolVersion);
};

// Content digests, prefixed with the hash name: "fnv1a64:<16 hex>".
std::string string_digest(std::string_view content);
std::string file_digest(const std::filesystem::path& path);

std::string current_timestamp_utc();

// Flat key-value text, one "key = value" per line; input digests are stored
// under "input:<path>" keys.
void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace forge::manifest
