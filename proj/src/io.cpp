#include "behavior_codec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "behavior_codec/error.hpp"

namespace behavior_codec {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot open {} for reading", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, fmt::format("failed reading {}", path.string()));
  return buffer.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path temp = path;
  temp += fmt::format(".tmp{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, fmt::format("cannot open {} for writing", temp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(temp, ec);
      throw Error(ErrorKind::IoError, fmt::format("failed writing {}", temp.string()));
    }
  }
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorKind::IoError, fmt::format("cannot move output into place at {}", path.string()));
  }
}

std::string format_number(double value) { return fmt::format("{}", value); }

namespace {

[[noreturn]] void schema_error(std::size_t line, const std::string& message) {
  throw Error(ErrorKind::SchemaViolation, fmt::format("line {}: {}", line, message), line);
}

const Json& field(const Json& object, const char* name, std::size_t line) {
  const auto it = object.find(name);
  if (it == object.end()) schema_error(line, fmt::format("missing field '{}'", name));
  return *it;
}

std::string string_field(const Json& object, const char* name, std::size_t line) {
  const Json& v = field(object, name, line);
  if (!v.is_string()) schema_error(line, fmt::format("field '{}' must be a string", name));
  return v.get<std::string>();
}

long long int_field(const Json& object, const char* name, std::size_t line) {
  const Json& v = field(object, name, line);
  if (!v.is_number_integer()) schema_error(line, fmt::format("field '{}' must be an integer", name));
  return v.get<long long>();
}

double number_field(const Json& object, const char* name, std::size_t line) {
  const Json& v = field(object, name, line);
  if (!v.is_number()) schema_error(line, fmt::format("field '{}' must be a number", name));
  return v.get<double>();
}

GameId game_field(const Json& object, std::size_t line) {
  const std::string name = string_field(object, "game", line);
  const std::optional<GameId> game = parse_game_id(name);
  if (!game) schema_error(line, fmt::format("unknown game '{}'", name));
  return *game;
}

std::vector<int> int_array_field(const Json& object, const char* name, std::size_t line) {
  const Json& v = field(object, name, line);
  if (!v.is_array()) schema_error(line, fmt::format("field '{}' must be an array", name));
  std::vector<int> out;
  out.reserve(v.size());
  for (const Json& x : v) {
    if (!x.is_number_integer()) schema_error(line, fmt::format("field '{}' must hold integers", name));
    out.push_back(x.get<int>());
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t line = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++line;
    std::string_view text = content.substr(start, end - start);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (text.find_first_not_of(" \t") != std::string_view::npos) {
      Json object;
      try {
        object = Json::parse(text);
      } catch (const Json::exception& e) {
        schema_error(line, fmt::format("invalid JSON: {}", e.what()));
      }
      if (!object.is_object()) schema_error(line, "expected a JSON object");
      fn(object, line);
    }
    if (end == content.size()) break;
    start = end + 1;
  }
}

Json code_to_json(const BehavioralCode& c) {
  Json j;
  j["id"] = c.id;
  j["game"] = std::string(to_string(c.game));
  j["target"] = c.target.value;
  j["text"] = c.text;
  j["parent_id"] = c.parent_id ? Json(*c.parent_id) : Json(nullptr);
  j["repeat_index"] = c.repeat_index;
  j["improve_index"] = c.improve_index;
  j["created_at"] = c.created_at;
  return j;
}

BehavioralCode code_from_json(const Json& j, std::size_t line) {
  BehavioralCode c;
  c.id = string_field(j, "id", line);
  if (c.id.empty()) schema_error(line, "code id is empty");
  c.game = game_field(j, line);
  c.target = {c.game, static_cast<int>(int_field(j, "target", line))};
  if (!scenario(c.game).action_space.contains(c.target.value)) {
    schema_error(line, fmt::format("target {} is not a valid {} action", c.target.value, to_string(c.game)));
  }
  c.text = string_field(j, "text", line);
  if (c.text.empty()) schema_error(line, "code text is empty");
  const Json& parent = field(j, "parent_id", line);
  if (parent.is_string()) {
    c.parent_id = parent.get<std::string>();
  } else if (!parent.is_null()) {
    schema_error(line, "field 'parent_id' must be a string or null");
  }
  c.repeat_index = static_cast<int>(int_field(j, "repeat_index", line));
  c.improve_index = static_cast<int>(int_field(j, "improve_index", line));
  if (c.repeat_index < 1 || c.improve_index < 0) schema_error(line, "repeat_index must be >= 1 and improve_index >= 0");
  c.created_at = string_field(j, "created_at", line);
  return c;
}

std::string join_lines(const std::vector<Json>& rows) {
  std::string out;
  for (const Json& r : rows) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::string codes_to_jsonl(std::span<const BehavioralCode> codes) {
  std::vector<Json> rows;
  for (const BehavioralCode& c : codes) rows.push_back(code_to_json(c));
  return join_lines(rows);
}

std::vector<BehavioralCode> codes_from_jsonl(std::string_view content) {
  std::vector<BehavioralCode> out;
  for_each_line(content, [&](const Json& j, std::size_t line) { out.push_back(code_from_json(j, line)); });
  return out;
}

void save_codes(const std::filesystem::path& path, std::span<const BehavioralCode> codes) {
  write_text_atomic(path, codes_to_jsonl(codes));
}

std::vector<BehavioralCode> load_codes(const std::filesystem::path& path) { return codes_from_jsonl(read_text(path)); }

std::string samples_to_jsonl(std::span<const SampleSet> samples) {
  std::vector<Json> rows;
  for (const SampleSet& s : samples) {
    Json j;
    j["code_id"] = s.code_id;
    j["game"] = std::string(to_string(s.game));
    j["backend_id"] = s.backend_id;
    j["values"] = s.values;
    j["missing_count"] = s.missing_count;
    rows.push_back(std::move(j));
  }
  return join_lines(rows);
}

std::vector<SampleSet> samples_from_jsonl(std::string_view content) {
  std::vector<SampleSet> out;
  for_each_line(content, [&](const Json& j, std::size_t line) {
    SampleSet s;
    s.code_id = string_field(j, "code_id", line);
    s.game = game_field(j, line);
    s.backend_id = string_field(j, "backend_id", line);
    s.values = int_array_field(j, "values", line);
    s.missing_count = static_cast<int>(int_field(j, "missing_count", line));
    const ActionSpace& space = scenario(s.game).action_space;
    for (int v : s.values) {
      if (!space.contains(v)) schema_error(line, fmt::format("sample {} is not a valid {} action", v, to_string(s.game)));
    }
    if (s.missing_count < 0) schema_error(line, "missing_count must be >= 0");
    out.push_back(std::move(s));
  });
  return out;
}

void save_samples(const std::filesystem::path& path, std::span<const SampleSet> samples) {
  write_text_atomic(path, samples_to_jsonl(samples));
}

std::vector<SampleSet> load_samples(const std::filesystem::path& path) { return samples_from_jsonl(read_text(path)); }

std::string mixture_to_jsonl(const MixtureFile& m) {
  if (m.weights.w.size() != m.library.size()) {
    throw Error(ErrorKind::PreconditionViolation, "mixture weights and library differ in size");
  }
  std::vector<Json> rows;
  Json meta;
  meta["kind"] = "metadata";
  meta["game"] = std::string(to_string(m.game));
  meta["alpha"] = m.config.alpha;
  meta["tolerance"] = m.config.tolerance;
  meta["max_restarts"] = m.config.max_restarts;
  meta["samples_per_code"] = m.config.samples_per_code;
  meta["eval_samples"] = m.config.eval_samples;
  meta["seed"] = m.config.rng_seed;
  meta["norm_kind"] = m.config.norm == NormKind::L2 ? "l2" : "l1";
  meta["loss"] = m.loss;
  meta["wasserstein"] = m.wasserstein;
  meta["norm"] = m.norm;
  meta["attempts"] = m.attempts;
  meta["codes"] = m.library.size();
  rows.push_back(std::move(meta));
  for (std::size_t i = 0; i < m.library.size(); ++i) {
    Json row;
    row["kind"] = "code";
    row["weight"] = m.weights.w[i];
    row["code"] = code_to_json(m.library[i].code);
    row["samples"] = m.library[i].samples;
    rows.push_back(std::move(row));
  }
  return join_lines(rows);
}

MixtureFile mixture_from_jsonl(std::string_view content) {
  MixtureFile m;
  bool have_meta = false;
  for_each_line(content, [&](const Json& j, std::size_t line) {
    const std::string kind = string_field(j, "kind", line);
    if (kind == "metadata") {
      if (have_meta) schema_error(line, "duplicate metadata line");
      have_meta = true;
      m.game = game_field(j, line);
      m.config.alpha = number_field(j, "alpha", line);
      m.config.tolerance = number_field(j, "tolerance", line);
      m.config.max_restarts = static_cast<int>(int_field(j, "max_restarts", line));
      m.config.samples_per_code = static_cast<int>(int_field(j, "samples_per_code", line));
      m.config.eval_samples = static_cast<int>(int_field(j, "eval_samples", line));
      const Json& seed = field(j, "seed", line);
      if (!seed.is_number_unsigned() && !seed.is_number_integer()) schema_error(line, "field 'seed' must be an integer");
      m.config.rng_seed = seed.get<std::uint64_t>();
      const std::string norm = string_field(j, "norm_kind", line);
      if (norm != "l2" && norm != "l1") schema_error(line, "norm_kind must be l2 or l1");
      m.config.norm = norm == "l2" ? NormKind::L2 : NormKind::L1;
      m.loss = number_field(j, "loss", line);
      m.wasserstein = number_field(j, "wasserstein", line);
      m.norm = number_field(j, "norm", line);
      m.attempts = static_cast<int>(int_field(j, "attempts", line));
    } else if (kind == "code") {
      if (!have_meta) schema_error(line, "code row before metadata");
      const Json& code = field(j, "code", line);
      if (!code.is_object()) schema_error(line, "field 'code' must be an object");
      LibraryEntry entry{code_from_json(code, line), int_array_field(j, "samples", line)};
      if (entry.code.game != m.game) schema_error(line, "code game differs from mixture game");
      m.weights.code_ids.push_back(entry.code.id);
      m.weights.w.push_back(number_field(j, "weight", line));
      m.library.push_back(std::move(entry));
    } else {
      schema_error(line, fmt::format("unknown row kind '{}'", kind));
    }
  });
  if (!have_meta) throw Error(ErrorKind::SchemaViolation, "mixture file has no metadata line");
  if (!m.weights.valid()) throw Error(ErrorKind::SchemaViolation, "mixture weights are not on the simplex");
  return m;
}

void save_mixture(const std::filesystem::path& path, const MixtureFile& mixture) {
  write_text_atomic(path, mixture_to_jsonl(mixture));
}

MixtureFile load_mixture(const std::filesystem::path& path) { return mixture_from_jsonl(read_text(path)); }

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <typename T>
bool parse_cell(std::string_view cell, T& out) {
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

EmpiricalDistribution distribution_from_csv(std::string_view content, GameId game) {
  const ActionSpace& space = scenario(game).action_space;
  std::vector<std::pair<int, double>> counts;
  bool header_seen = false;
  bool weighted = false;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++line;
    const std::string_view text = trim(content.substr(start, end - start));
    start = end + 1;
    if (text.empty()) continue;
    const std::vector<std::string_view> cells = split_commas(text);
    if (!header_seen) {
      header_seen = true;
      if (cells.size() == 1 && cells[0] == "value") continue;
      if (cells.size() == 2 && cells[0] == "value" && cells[1] == "count") {
        weighted = true;
        continue;
      }
      throw Error(ErrorKind::ParseError, "line 1: expected header 'value' or 'value,count'", line);
    }
    if (cells.size() != (weighted ? 2U : 1U)) {
      throw Error(ErrorKind::ParseError, fmt::format("line {}: expected {} column(s)", line, weighted ? 2 : 1), line);
    }
    int value = 0;
    if (!parse_cell(cells[0], value)) {
      throw Error(ErrorKind::ParseError, fmt::format("line {}: '{}' is not an integer", line, cells[0]), line);
    }
    if (!space.contains(value)) {
      throw Error(ErrorKind::OffGridValue,
                  fmt::format("line {}: {} is not a valid {} action", line, value, to_string(game)), line);
    }
    double count = 1.0;
    if (weighted && (!parse_cell(cells[1], count) || !std::isfinite(count) || count < 0.0)) {
      throw Error(ErrorKind::ParseError, fmt::format("line {}: '{}' is not a non-negative count", line, cells[1]), line);
    }
    counts.emplace_back(value, count);
  }
  if (!header_seen) throw Error(ErrorKind::ParseError, "distribution file is empty");
  return EmpiricalDistribution::from_counts(counts);
}

EmpiricalDistribution load_distribution(const std::filesystem::path& path, GameId game) {
  return distribution_from_csv(read_text(path), game);
}

std::string distribution_to_csv(const EmpiricalDistribution& dist) {
  std::string out = "value,count\n";
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double count = dist.masses()[i];
    if (dist.observations() > 0.0) {
      count *= dist.observations();
      const double rounded = std::round(count);
      if (std::abs(count - rounded) < 1e-6) count = rounded;
    }
    out += fmt::format("{},{}\n", dist.support()[i], format_number(count));
  }
  return out;
}

void save_distribution(const std::filesystem::path& path, const EmpiricalDistribution& dist) {
  write_text_atomic(path, distribution_to_csv(dist));
}

std::string embeddings_to_jsonl(std::span<const CodeEmbedding> embeddings) {
  std::vector<Json> rows;
  for (const CodeEmbedding& e : embeddings) {
    Json j;
    j["code_id"] = e.code_id;
    j["backend_id"] = e.embedding.backend_id;
    j["values"] = e.embedding.values;
    rows.push_back(std::move(j));
  }
  return join_lines(rows);
}

std::vector<CodeEmbedding> embeddings_from_jsonl(std::string_view content) {
  std::vector<CodeEmbedding> out;
  for_each_line(content, [&](const Json& j, std::size_t line) {
    CodeEmbedding e;
    e.code_id = string_field(j, "code_id", line);
    e.embedding.backend_id = string_field(j, "backend_id", line);
    const Json& values = field(j, "values", line);
    if (!values.is_array() || values.empty()) schema_error(line, "field 'values' must be a non-empty array");
    for (const Json& v : values) {
      if (!v.is_number()) schema_error(line, "embedding values must be numbers");
      e.embedding.values.push_back(v.get<double>());
    }
    out.push_back(std::move(e));
  });
  return out;
}

void save_embeddings(const std::filesystem::path& path, std::span<const CodeEmbedding> embeddings) {
  write_text_atomic(path, embeddings_to_jsonl(embeddings));
}

std::vector<CodeEmbedding> load_embeddings(const std::filesystem::path& path) {
  return embeddings_from_jsonl(read_text(path));
}

std::string csv_row(std::span<const std::string> cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) out += ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n\r") == std::string::npos) {
      out += c;
      continue;
    }
    out += '"';
    for (char ch : c) {
      if (ch == '"') out += '"';
      out += ch;
    }
    out += '"';
  }
  return out;
}

}  // namespace behavior_codec
