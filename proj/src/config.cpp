#include "behavior_codec/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ParseError, fmt::format("config line {}: expected 'key = value'", line_no),
                  line_no);
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorKind::ParseError, fmt::format("config line {}: empty key", line_no), line_no);
    }
    out.set(std::move(key), trim(std::string_view(body).substr(eq + 1)));
  }
  return out;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read config {}", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double out = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, fmt::format("config key {}: '{}' is not a number", key, *v));
  }
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long out = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, fmt::format("config key {}: '{}' is not an integer", key, *v));
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::string lower = *v;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return true;
  if (lower == "false" || lower == "0" || lower == "no" || lower == "off") return false;
  throw Error(ErrorKind::ParseError, fmt::format("config key {}: '{}' is not a boolean", key, *v));
}

void Config::merge(const Config& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

Config Config::section(std::string_view prefix) const {
  Config out;
  const std::string lead = std::string(prefix) + ".";
  for (const auto& [k, v] : values_) {
    if (k.starts_with(lead)) out.set(k.substr(lead.size()), v);
  }
  return out;
}

}  // namespace behavior_codec
