#include "behavior_codec/manifest.hpp"

#include <array>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "behavior_codec/error.hpp"
#include "behavior_codec/io.hpp"

namespace behavior_codec {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.string(), file_sha256(path)});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.push_back({path.string(), file_sha256(path)});
}

std::string RunManifest::run_id() const {
  std::string key = command;
  for (const auto& [k, v] : config) key += fmt::format("\n{}={}", k, v);
  for (const FileDigest& d : inputs) key += fmt::format("\n<{}", d.sha256);
  return sha256_hex(key).substr(0, 16);
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id();
  j["command"] = command;
  j["argv"] = argv;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  auto digests = [](const std::vector<FileDigest>& files) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const FileDigest& d : files) a.push_back({{"path", d.path}, {"sha256", d.sha256}});
    return a;
  };
  j["inputs"] = digests(inputs);
  j["outputs"] = digests(outputs);
  nlohmann::ordered_json t = nlohmann::ordered_json::object();
  for (const auto& [k, v] : timings_ms) t[k] = v;
  j["timings_ms"] = t;
  return j.dump(2) + "\n";
}

std::filesystem::path manifest_path_for(const std::filesystem::path& primary_output) {
  std::filesystem::path p = primary_output;
  p += ".manifest.json";
  return p;
}

}  // namespace behavior_codec
