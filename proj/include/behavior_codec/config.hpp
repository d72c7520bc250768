#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace behavior_codec {

/// Flat key-value configuration.
///
/// File format: one `key = value` pair per line; `#` starts a comment; blank
/// lines are ignored; keys are dotted lowercase names such as
/// `scripted.kernel.halfwidth`. Later definitions override earlier ones.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  [[nodiscard]] bool contains(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;

  [[nodiscard]] std::string get_string(const std::string& key, std::string fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] long long get_int(const std::string& key, long long fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;

  /// Entries of `overrides` replace entries here.
  void merge(const Config& overrides);

  /// Keys under `prefix.` with the prefix stripped.
  [[nodiscard]] Config section(std::string_view prefix) const;

  [[nodiscard]] const std::map<std::string, std::string>& entries() const noexcept {
    return values_;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace behavior_codec
