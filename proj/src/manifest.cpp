#include "forge/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "forge/text.hpp"

namespace forge::manifest {

std::string string_digest(std::string_view content) {
  return "fnv1a64:" + text::fnv1a64_hex(content);
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open " + path.string() + " for digesting");
  std::ostringstream buf;
  buf << in.rdbuf();
  return string_digest(buf.str());
}

std::string current_timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ManifestError("cannot open " + path.string() + " for writing");
  out << "command = " << m.command << '\n';
  out << "config_digest = " << m.config_digest << '\n';
  for (const auto& [input, digest] : m.input_digests) {
    out << "input:" << input << " = " << digest << '\n';
  }
  out << "seed = " << m.seed << '\n';
  out << "timestamp = " << m.timestamp << '\n';
  out << "tool_version = " << m.tool_version << '\n';
  if (!out) throw ManifestError("failed writing " + path.string());
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open " + path.string());
  RunManifest m;
  m.tool_version.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::is_blank(line)) continue;
    const auto sep = line.find(" = ");
    if (sep == std::string::npos) {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
    }
    const std::string key = line.substr(0, sep);
    const std::string value = line.substr(sep + 3);
    if (key == "command") {
      m.command = value;
    } else if (key == "config_digest") {
      m.config_digest = value;
    } else if (key == "seed") {
      m.seed = std::stoll(value);
    } else if (key == "timestamp") {
      m.timestamp = value;
    } else if (key == "tool_version") {
      m.tool_version = value;
    } else if (key.rfind("input:", 0) == 0) {
      m.input_digests[key.substr(6)] = value;
    } else {
      throw ManifestError(path.string() + ":" + std::to_string(lineno) +
                          ": unknown key '" + key + "'");
    }
  }
  return m;
}

}  // namespace forge::manifest
