#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace behavior_codec {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
/// Throws Error(IoError).
std::string file_sha256(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Provenance record written next to every CLI output.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  /// Resolved settings after CLI, environment, file and default precedence.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::vector<std::pair<std::string, double>> timings_ms;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  /// Hash of command, config and input digests; identical reruns share it.
  [[nodiscard]] std::string run_id() const;
  [[nodiscard]] std::string to_json() const;
};

/// `<output>.manifest.json` beside the primary output.
std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output);

}  // namespace behavior_codec
