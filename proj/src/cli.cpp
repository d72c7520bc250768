#include "behavior_codec/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "behavior_codec/alignment.hpp"
#include "behavior_codec/analysis.hpp"
#include "behavior_codec/config.hpp"
#include "behavior_codec/elicitation.hpp"
#include "behavior_codec/error.hpp"
#include "behavior_codec/io.hpp"
#include "behavior_codec/manifest.hpp"
#include "behavior_codec/openai_backend.hpp"
#include "behavior_codec/rate_limiter.hpp"
#include "behavior_codec/scripted_backend.hpp"
#include "behavior_codec/svg.hpp"
#include "behavior_codec/text.hpp"

extern char** environ;

namespace behavior_codec {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Environment process_environment() {
  Environment env;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string_view key = entry.substr(0, eq);
    if (key.starts_with("BEHAVIOR_CODEC_")) env.emplace(key, entry.substr(eq + 1));
  }
  return env;
}

namespace {

// Options shared by every subcommand.
struct Globals {
  std::string config_path;
  std::string backend;
  std::optional<std::uint64_t> backend_seed;
  std::string instructions_dir;
  std::size_t parallelism = 4;
  std::string manifest_path;
};

struct Session {
  Globals globals;
  Config config;  // defaults < file < environment < CLI flags (flags applied per command)
  std::vector<std::string> argv;
  std::string command;
  std::ostream& out;
  RunManifest manifest;

  std::unique_ptr<ScriptedBackend> scripted;
  std::unique_ptr<OpenAiBackend> live;
  SteadyClock clock;
  std::unique_ptr<Timestamper> timestamper;

  Session(std::ostream& o) : out(o) {}

  [[nodiscard]] std::string backend_name() const { return config.get_string("backend", "scripted"); }

  GameScenario game(GameId id) const {
    const auto dir = config.get("instructions.dir");
    return dir ? scenario(id, *dir) : scenario(id);
  }

  void open_backend() {
    if (scripted || live) return;
    const std::string name = backend_name();
    if (name == "scripted") {
      std::vector<GameScenario> scenarios;
      for (GameId g : kAllGames) scenarios.push_back(game(g));
      scripted = std::make_unique<ScriptedBackend>(ScriptedBackendSpec::from_config(config.section("scripted")),
                                                   std::move(scenarios));
      timestamper = std::make_unique<FixedTimestamper>();
      const Config snapshot = scripted->spec().to_config();
      for (const auto& [k, v] : snapshot.entries()) record("scripted." + k, v);
    } else if (name == "openai") {
      OpenAiSettings settings = OpenAiSettings::from_config(config);
      record("live.base_url", settings.base_url);
      record("live.chat_model", settings.chat_model);
      record("live.embedding_model", settings.embedding_model);
      live = std::make_unique<OpenAiBackend>(std::move(settings), clock);
      timestamper = std::make_unique<SystemTimestamper>();
    } else {
      throw Error(ErrorKind::UsageError, fmt::format("unknown backend '{}' (expected scripted or openai)", name));
    }
    record("backend", name);
  }

  ChatBackend& chat() {
    open_backend();
    if (scripted) return *scripted;
    return *live;
  }

  EmbeddingBackend& embedder() {
    open_backend();
    if (scripted) return *scripted;
    return *live;
  }

  void record(const std::string& key, const std::string& value) {
    auto& c = manifest.config;
    const auto it = std::find_if(c.begin(), c.end(), [&](const auto& kv) { return kv.first == key; });
    if (it != c.end()) {
      it->second = value;
    } else {
      c.emplace_back(key, value);
    }
  }
  void record(const std::string& key, double value) { record(key, format_number(value)); }
  void record(const std::string& key, long long value) { record(key, std::to_string(value)); }

  void input(const fs::path& p) { manifest.add_input(p); }
  void output(const fs::path& p) { manifest.add_output(p); }

  void finish(const std::optional<fs::path>& primary, double elapsed_ms) {
    manifest.command = command;
    manifest.argv = argv;
    manifest.timings_ms.emplace_back("total", elapsed_ms);
    fs::path target;
    if (!globals.manifest_path.empty()) {
      target = globals.manifest_path;
    } else if (primary) {
      target = manifest_path_for(*primary);
    } else if (!manifest.inputs.empty()) {
      target = fs::path(manifest.inputs.front().path);
      target += fmt::format(".{}.manifest.json", command);
    } else {
      target = fs::path(fmt::format("{}.manifest.json", command));
    }
    write_text_atomic(target, manifest.to_json());
  }

  void report(const Json& j) { out << j.dump(2) << '\n'; }
};

GameId parse_game_arg(const std::string& name) {
  const std::optional<GameId> g = parse_game_id(name);
  if (!g) throw Error(ErrorKind::UsageError, fmt::format("unknown game '{}'", name));
  return *g;
}

std::vector<int> parse_targets(const std::string& spec, const ActionSpace& space) {
  if (spec == "all") return space.values();
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorKind::UsageError, fmt::format("bad target value '{}' in --targets", s));
    }
    return v;
  };
  std::vector<int> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string_view> parts;
    std::string_view rest(spec);
    for (std::size_t colon; (colon = rest.find(':')) != std::string_view::npos; rest.remove_prefix(colon + 1)) {
      parts.push_back(rest.substr(0, colon));
    }
    parts.push_back(rest);
    if (parts.size() != 3) throw Error(ErrorKind::UsageError, "--targets range must look like start:stop:step");
    const int a = to_int(parts[0]);
    const int b = to_int(parts[1]);
    const int s = to_int(parts[2]);
    if (s <= 0 || b < a) throw Error(ErrorKind::UsageError, "--targets range needs start <= stop and step > 0");
    for (int v = a; v <= b; v += s) out.push_back(v);
    return out;
  }
  std::string_view rest(spec);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(to_int(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error(ErrorKind::UsageError, "--targets is empty");
  return out;
}

fs::path default_samples_path(const fs::path& codes) {
  fs::path p = codes;
  if (p.extension() == ".jsonl") p.replace_extension();
  p += ".samples.jsonl";
  return p;
}

Json ks_json(const KsResult& r) {
  Json j;
  j["statistic"] = r.statistic;
  j["p_value"] = r.p_value;
  j["effective_n"] = r.effective_n;
  return j;
}

Json evaluation_json(const EvaluationReport& r) {
  Json j;
  j["wasserstein"] = r.wasserstein;
  j["ks"] = ks_json(r.ks);
  j["relaxed_ks"] = ks_json(r.relaxed);
  j["bin_width"] = r.bin_width;
  j["sample_count"] = r.sample_count;
  return j;
}

std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : std::string("nan"); }

// Codes of one game joined with their samples, for the analysis commands.
struct GameCorpus {
  std::vector<BehavioralCode> codes;
  std::vector<TokenizedCode> tokens;
  std::vector<double> means;
};

GameCorpus corpus_for(const std::vector<BehavioralCode>& codes, const std::vector<SampleSet>* samples, GameId game) {
  std::map<std::string, const SampleSet*> by_code;
  if (samples != nullptr) {
    for (const SampleSet& s : *samples) by_code[s.code_id] = &s;
  }
  GameCorpus c;
  for (const BehavioralCode& code : codes) {
    if (code.game != game) continue;
    if (samples != nullptr) {
      const auto it = by_code.find(code.id);
      if (it == by_code.end() || it->second->values.empty()) continue;
      c.means.push_back(mean_behavior(*it->second));
    }
    c.codes.push_back(code);
    c.tokens.push_back(preprocess(code.text, code.id));
  }
  return c;
}

std::vector<GameId> games_in(const std::vector<BehavioralCode>& codes, const std::string& only) {
  if (!only.empty()) return {parse_game_arg(only)};
  std::set<GameId> present;
  for (const BehavioralCode& c : codes) present.insert(c.game);
  std::vector<GameId> out;
  for (GameId g : kAllGames) {
    if (present.contains(g)) out.push_back(g);
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv_cells(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          cell += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
      } else {
        cell += ch;
      }
    }
    cells.push_back(std::move(cell));
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double_cell(const std::string& cell, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw Error(ErrorKind::ParseError, fmt::format("line {}: '{}' is not a number", line, cell), line);
  }
  return v;
}

// ---- subcommands -----------------------------------------------------------

struct ElicitArgs {
  std::string game;
  std::string targets = "all";
  int repeats = 5;
  int improvements = 3;
  int samples = 10;
  std::string out;
  std::string samples_out;
};

void run_elicit(Session& s, const ElicitArgs& a) {
  const GameScenario game = s.game(parse_game_arg(a.game));
  std::vector<Behavior> targets;
  for (int v : parse_targets(a.targets, game.action_space)) targets.push_back({game.id, v});
  s.record("game", std::string(to_string(game.id)));
  s.record("targets", a.targets);
  s.record("repeats", static_cast<long long>(a.repeats));
  s.record("improvements", static_cast<long long>(a.improvements));
  s.record("samples", static_cast<long long>(a.samples));

  LearnOptions options;
  options.outer_repeats = a.repeats;
  options.inner_improvements = a.improvements;
  options.samples_per_eval = a.samples;
  options.parallelism = s.globals.parallelism;
  options.crafting.model_name = s.config.get_string("live.chat_model", "");
  options.elicitation.model_name = options.crafting.model_name;
  ChatBackend& backend = s.chat();
  const LearnResult result = learn_codes(backend, game, targets, *s.timestamper, options);

  const fs::path codes_path = a.out;
  const fs::path samples_path = a.samples_out.empty() ? default_samples_path(codes_path) : fs::path(a.samples_out);
  save_codes(codes_path, result.codes);
  save_samples(samples_path, result.samples);
  s.output(codes_path);
  s.output(samples_path);

  Json j;
  j["codes"] = result.codes.size();
  j["repeats"] = result.outcomes.size();
  j["converged"] = std::count_if(result.outcomes.begin(), result.outcomes.end(),
                                 [](const RepeatOutcome& o) { return o.converged; });
  j["convergence_rate"] = result.convergence_rate();
  Json failures = Json::array();
  for (const TargetFailure& f : result.failures) {
    failures.push_back({{"target", f.target}, {"repeat", f.repeat_index}, {"error", f.error_kind}, {"message", f.message}});
  }
  j["failures"] = failures;
  j["codes_out"] = codes_path.string();
  j["samples_out"] = samples_path.string();
  s.report(j);
}

struct AlignArgs {
  std::string game;
  std::string codes;
  std::string samples;
  std::string target;
  double alpha = 3.0;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  int max_restarts = 10;
  int samples_per_code = 10;
  std::string norm = "l2";
  std::string out;
};

void run_align(Session& s, const AlignArgs& a) {
  const GameScenario game = s.game(parse_game_arg(a.game));
  AlignmentConfig config;
  config.alpha = a.alpha;
  config.tolerance = a.tolerance;
  config.rng_seed = a.seed;
  config.max_restarts = a.max_restarts;
  config.samples_per_code = a.samples_per_code;
  if (a.norm != "l2" && a.norm != "l1") throw Error(ErrorKind::UsageError, "--norm must be l2 or l1");
  config.norm = a.norm == "l2" ? NormKind::L2 : NormKind::L1;
  s.record("game", std::string(to_string(game.id)));
  s.record("alpha", config.alpha);
  s.record("tolerance", config.tolerance);
  s.record("seed", static_cast<long long>(config.rng_seed));
  s.record("max_restarts", static_cast<long long>(config.max_restarts));
  s.record("samples_per_code", static_cast<long long>(config.samples_per_code));
  s.record("norm", a.norm);

  std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  std::erase_if(codes, [&](const BehavioralCode& c) { return c.game != game.id; });
  if (codes.empty()) throw Error(ErrorKind::PreconditionViolation, fmt::format("no {} codes in {}", to_string(game.id), a.codes));
  const fs::path samples_path = a.samples.empty() ? default_samples_path(a.codes) : fs::path(a.samples);
  std::vector<SampleSet> samples;
  if (fs::exists(samples_path)) {
    samples = load_samples(samples_path);
    s.input(samples_path);
  } else if (!a.samples.empty()) {
    throw Error(ErrorKind::IoError, fmt::format("samples file {} does not exist", samples_path.string()));
  }
  std::erase_if(samples, [&](const SampleSet& x) { return x.game != game.id; });
  CodeLibrary library = build_library(codes, samples);
  const bool needs_cache = std::any_of(library.begin(), library.end(), [](const LibraryEntry& e) { return e.samples.empty(); });
  if (needs_cache) populate_cache(s.chat(), game, library, config.samples_per_code, {}, s.globals.parallelism);
  std::erase_if(library, [](const LibraryEntry& e) { return e.samples.empty(); });

  const EmpiricalDistribution target = load_distribution(a.target, game.id);
  s.input(a.target);
  const AlignmentResult result = align(target, library, config);

  MixtureFile file;
  file.game = game.id;
  file.config = config;
  file.loss = result.loss;
  file.wasserstein = result.wasserstein;
  file.norm = result.norm;
  file.attempts = result.attempts;
  file.library = std::move(library);
  file.weights = result.weights;
  save_mixture(a.out, file);
  s.output(a.out);

  Json j;
  j["loss"] = result.loss;
  j["wasserstein"] = result.wasserstein;
  j["norm"] = result.norm;
  j["attempts"] = result.attempts;
  j["codes"] = file.library.size();
  Json active = Json::array();
  for (std::size_t i : result.weights.active()) {
    active.push_back({{"code_id", result.weights.code_ids[i]}, {"weight", result.weights.w[i]}});
  }
  j["active"] = active;
  s.report(j);
}

struct EvaluateArgs {
  std::string mixture;
  std::string target;
  std::string target_game;  // transfer only
  int eval_samples = 1000;
  int bin = 0;
  std::uint64_t seed = 0;
  bool cached = false;
  std::string out;
  std::string elicited_out;
};

void run_evaluate(Session& s, const EvaluateArgs& a, bool transfer) {
  const MixtureFile mixture = load_mixture(a.mixture);
  s.input(a.mixture);
  const GameScenario game = s.game(transfer ? parse_game_arg(a.target_game) : mixture.game);
  if (transfer && a.cached) throw Error(ErrorKind::UsageError, "transfer always re-elicits; --cached is not allowed");
  const EmpiricalDistribution target = load_distribution(a.target, game.id);
  s.input(a.target);
  const int bin = a.bin > 0 ? a.bin : default_relaxed_bin(game.id);
  AlignmentConfig config = mixture.config;
  config.eval_samples = a.eval_samples;
  config.rng_seed = a.seed;
  s.record("source_game", std::string(to_string(mixture.game)));
  s.record("game", std::string(to_string(game.id)));
  s.record("eval_samples", static_cast<long long>(a.eval_samples));
  s.record("bin", static_cast<long long>(bin));
  s.record("seed", static_cast<long long>(a.seed));
  s.record("sampling", a.cached ? "cached" : "live");
  if (a.eval_samples < 1) throw Error(ErrorKind::UsageError, "--eval-samples must be >= 1");

  EvaluationReport report;
  if (a.cached) {
    const std::vector<int> draws = sample_mixture(mixture.library, mixture.weights,
                                                  static_cast<std::size_t>(a.eval_samples), a.seed);
    report = evaluate_samples(draws, target, bin);
  } else if (transfer) {
    report = transfer_evaluate(s.chat(), mixture.library, mixture.weights, game, target, config, bin);
  } else {
    report = evaluate_mixture(s.chat(), game, mixture.library, mixture.weights, target, config, bin);
  }
  Json j = evaluation_json(report);
  j["source_game"] = std::string(to_string(mixture.game));
  j["game"] = std::string(to_string(game.id));
  if (!a.elicited_out.empty()) {
    save_distribution(a.elicited_out, report.elicited);
    s.output(a.elicited_out);
  }
  if (!a.out.empty()) {
    write_text_atomic(a.out, j.dump(2) + "\n");
    s.output(a.out);
  }
  s.report(j);
}

struct KeywordArgs {
  std::string codes;
  std::string game;
  std::size_t top = 50;
  std::string out;
  std::string vectors_out;
};

void run_keywords(Session& s, const KeywordArgs& a) {
  const std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  s.record("top", static_cast<long long>(a.top));
  std::string csv = "game,rank,keyword,score\n";
  std::string vectors = "game,code_id,bits\n";
  Json summary = Json::object();
  for (GameId g : games_in(codes, a.game)) {
    const GameCorpus corpus = corpus_for(codes, nullptr, g);
    const KeywordBasis basis = tfidf_keywords(corpus.tokens, a.top, g);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      csv += fmt::format("{},{},{},{}\n", to_string(g), i + 1, basis.keywords[i], format_number(basis.scores[i]));
    }
    for (const TokenizedCode& t : corpus.tokens) {
      const KeywordVector v = keyword_vector(t, basis);
      std::string bits;
      for (std::uint8_t b : v.bits) bits += b ? '1' : '0';
      vectors += fmt::format("{},{},{}\n", to_string(g), csv_row(std::vector<std::string>{v.code_id}), bits);
    }
    summary[std::string(to_string(g))] = std::vector<std::string>(
        basis.keywords.begin(), basis.keywords.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(basis.size(), 10)));
  }
  write_text_atomic(a.out, csv);
  s.output(a.out);
  if (!a.vectors_out.empty()) {
    write_text_atomic(a.vectors_out, vectors);
    s.output(a.vectors_out);
  }
  s.report(Json{{"top_keywords", summary}});
}

struct RegressArgs {
  std::string codes;
  std::string samples;
  std::string game;
  std::string method = "ols";
  double lasso_alpha = 0.3;
  std::size_t top = 50;
  std::size_t rank = 10;
  std::string out;
  std::string plot;
};

std::vector<SampleSet> samples_for(Session& s, const std::string& codes_path, const std::string& explicit_path) {
  const fs::path p = explicit_path.empty() ? default_samples_path(codes_path) : fs::path(explicit_path);
  std::vector<SampleSet> samples = load_samples(p);
  s.input(p);
  return samples;
}

void run_regress(Session& s, const RegressArgs& a) {
  if (a.method != "ols" && a.method != "lasso") throw Error(ErrorKind::UsageError, "--method must be ols or lasso");
  const std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  const std::vector<SampleSet> samples = samples_for(s, a.codes, a.samples);
  const RegressionMethod method = a.method == "ols" ? RegressionMethod::OLS : RegressionMethod::LASSO;
  s.record("method", a.method);
  if (method == RegressionMethod::LASSO) s.record("lasso_alpha", a.lasso_alpha);
  s.record("top", static_cast<long long>(a.top));

  std::string csv = "game,rank,keyword,coefficient\n";
  Json summary = Json::object();
  std::vector<std::string> plot_labels;
  std::vector<double> plot_values;
  for (GameId g : games_in(codes, a.game)) {
    const GameCorpus corpus = corpus_for(codes, &samples, g);
    const KeywordBasis basis = tfidf_keywords(corpus.tokens, a.top, g);
    std::vector<KeywordVector> vectors;
    for (const TokenizedCode& t : corpus.tokens) vectors.push_back(keyword_vector(t, basis));
    const KeywordRegression r = regress_keywords(basis, vectors, corpus.means, method, a.lasso_alpha, a.rank);
    Json top = Json::array();
    for (std::size_t i = 0; i < r.top.size(); ++i) {
      csv += fmt::format("{},{},{},{}\n", to_string(g), i + 1, r.top[i].keyword, format_number(r.top[i].coefficient));
      top.push_back({{"keyword", r.top[i].keyword}, {"coefficient", r.top[i].coefficient}});
      if (summary.empty()) {
        plot_labels.push_back(r.top[i].keyword);
        plot_values.push_back(r.top[i].coefficient);
      }
    }
    Json j;
    j["codes"] = vectors.size();
    j["r_squared"] = r.report.r_squared;
    j["intercept"] = r.report.intercept;
    j["rank_deficient"] = r.report.rank_deficient;
    j["non_convergence"] = r.report.non_convergence;
    j["top"] = top;
    summary[std::string(to_string(g))] = j;
  }
  write_text_atomic(a.out, csv);
  s.output(a.out);
  if (!a.plot.empty() && !plot_labels.empty()) {
    emit_bars(a.plot, plot_labels, plot_values, fmt::format("{} coefficients", a.method));
    s.output(a.plot);
  }
  s.report(summary);
}

struct PcaArgs {
  std::string codes;
  std::string samples;
  std::string game;
  int k = 5;
  std::size_t top = 50;
  std::string out;
  std::string loadings_out;
};

void run_pca(Session& s, const PcaArgs& a) {
  const std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  const std::vector<SampleSet> samples = samples_for(s, a.codes, a.samples);
  s.record("k", static_cast<long long>(a.k));
  s.record("top", static_cast<long long>(a.top));
  std::string csv = "game,component,explained_variance_ratio,rho,p_value,best\n";
  std::string loadings = "game,component,keyword,loading\n";
  Json summary = Json::object();
  for (GameId g : games_in(codes, a.game)) {
    const GameCorpus corpus = corpus_for(codes, &samples, g);
    const KeywordBasis basis = tfidf_keywords(corpus.tokens, a.top, g);
    std::vector<KeywordVector> vectors;
    for (const TokenizedCode& t : corpus.tokens) vectors.push_back(keyword_vector(t, basis));
    const int k = std::min<int>(a.k, static_cast<int>(std::min(vectors.size(), basis.size())));
    const PcCorrelation r = pc_behavior_correlation(vectors, corpus.means, k);
    for (std::size_t c = 0; c < r.per_component.size(); ++c) {
      const CorrelationResult& cr = r.per_component[c];
      csv += fmt::format("{},{},{},{},{},{}\n", to_string(g), c + 1, format_number(r.pca.explained_variance_ratio[c]),
                         json_number(cr.rho), json_number(cr.p_value), c == r.best_component ? 1 : 0);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        loadings += fmt::format("{},{},{},{}\n", to_string(g), c + 1, basis.keywords[j],
                                format_number(r.pca.components(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c))));
      }
    }
    Json j;
    j["codes"] = vectors.size();
    j["components"] = r.per_component.size();
    j["degenerate_rank"] = r.pca.degenerate_rank;
    if (!r.per_component.empty()) {
      j["best_component"] = r.best_component + 1;
      j["best_rho"] = r.per_component[r.best_component].rho;
      j["best_p_value"] = r.per_component[r.best_component].p_value;
    }
    summary[std::string(to_string(g))] = j;
  }
  write_text_atomic(a.out, csv);
  s.output(a.out);
  if (!a.loadings_out.empty()) {
    write_text_atomic(a.loadings_out, loadings);
    s.output(a.loadings_out);
  }
  s.report(summary);
}

struct EmbedArgs {
  std::string codes;
  std::string out;
};

void run_embed(Session& s, const EmbedArgs& a) {
  const std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  EmbeddingBackend& backend = s.embedder();
  std::vector<CodeEmbedding> embeddings;
  for (const BehavioralCode& c : codes) embeddings.push_back({c.id, backend.embed(c.text)});
  save_embeddings(a.out, embeddings);
  s.output(a.out);
  s.report(Json{{"embedded", embeddings.size()}, {"backend_id", backend.id()}});
}

struct SimilarityArgs {
  std::string codes;
  std::string embeddings;
  std::string out;
};

void run_similarity(Session& s, const SimilarityArgs& a) {
  const std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  const std::vector<CodeEmbedding> embeddings = load_embeddings(a.embeddings);
  s.input(a.embeddings);
  const SimilarityMatrix m = game_similarity(codes, embeddings);
  std::string csv = "game";
  for (GameId g : kAllGames) csv += fmt::format(",{}", to_string(g));
  csv += '\n';
  for (std::size_t r = 0; r < kAllGames.size(); ++r) {
    csv += std::string(to_string(kAllGames[r]));
    for (std::size_t c = 0; c < kAllGames.size(); ++c) csv += "," + json_number(m.values[r][c]);
    csv += '\n';
  }
  write_text_atomic(a.out, csv);
  s.output(a.out);
  s.report(Json{{"backend_id", m.backend_id}, {"matrix", a.out}});
}

struct ConsistencyArgs {
  std::string codes;
  std::string samples;
  std::string out;
};

void run_consistency(Session& s, const ConsistencyArgs& a) {
  const std::vector<BehavioralCode> codes = load_codes(a.codes);
  s.input(a.codes);
  const std::vector<SampleSet> samples = samples_for(s, a.codes, a.samples);
  const std::vector<ConsistencyRow> rows = consistency_report(codes, samples);
  std::string csv = "code_id,mean,std_dev,n\n";
  double mean_sd = 0.0;
  for (const ConsistencyRow& r : rows) {
    csv += fmt::format("{},{},{},{}\n", csv_row(std::vector<std::string>{r.code_id}), format_number(r.mean),
                       format_number(r.std_dev), r.n);
    mean_sd += r.std_dev;
  }
  write_text_atomic(a.out, csv);
  s.output(a.out);
  s.report(Json{{"codes", rows.size()}, {"mean_std_dev", rows.empty() ? 0.0 : mean_sd / static_cast<double>(rows.size())}});
}

struct PlotArgs {
  std::string kind;
  std::string game;
  std::string target;
  std::string elicited;
  std::string matrix;
  std::string input;
  std::string label_column = "keyword";
  std::string value_column = "coefficient";
  std::string title;
  std::string out;
};

void run_plot(Session& s, const PlotArgs& a) {
  s.record("kind", a.kind);
  if (a.kind == "hist") {
    if (a.game.empty() || a.target.empty() || a.elicited.empty()) {
      throw Error(ErrorKind::UsageError, "plot --kind hist needs --game, --target and --elicited");
    }
    const GameId g = parse_game_arg(a.game);
    const EmpiricalDistribution target = load_distribution(a.target, g);
    s.input(a.target);
    const EmpiricalDistribution elicited = load_distribution(a.elicited, g);
    s.input(a.elicited);
    emit_histogram(a.out, target, elicited, a.title.empty() ? std::string(to_string(g)) : a.title);
  } else if (a.kind == "heatmap") {
    if (a.matrix.empty()) throw Error(ErrorKind::UsageError, "plot --kind heatmap needs --matrix");
    const auto rows = read_csv_cells(a.matrix);
    s.input(a.matrix);
    if (rows.size() < 2) throw Error(ErrorKind::EmptyData, "matrix file has no rows");
    std::vector<std::string> labels(rows[0].begin() + 1, rows[0].end());
    std::vector<std::vector<double>> values;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      std::vector<double> row;
      for (std::size_t c = 1; c < rows[r].size(); ++c) row.push_back(parse_double_cell(rows[r][c], r + 1));
      values.push_back(std::move(row));
    }
    emit_heatmap(a.out, labels, values, a.title.empty() ? "similarity" : a.title);
  } else if (a.kind == "bars") {
    if (a.input.empty()) throw Error(ErrorKind::UsageError, "plot --kind bars needs --input");
    const auto rows = read_csv_cells(a.input);
    s.input(a.input);
    if (rows.empty()) throw Error(ErrorKind::EmptyData, "bar input is empty");
    const auto column = [&](const std::string& name) {
      const auto it = std::find(rows[0].begin(), rows[0].end(), name);
      if (it == rows[0].end()) throw Error(ErrorKind::UsageError, fmt::format("column '{}' not found", name));
      return static_cast<std::size_t>(it - rows[0].begin());
    };
    const std::size_t lc = column(a.label_column);
    const std::size_t vc = column(a.value_column);
    std::vector<std::string> labels;
    std::vector<double> values;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() <= std::max(lc, vc)) throw Error(ErrorKind::ParseError, fmt::format("line {}: missing column", r + 1), r + 1);
      labels.push_back(rows[r][lc]);
      values.push_back(parse_double_cell(rows[r][vc], r + 1));
    }
    emit_bars(a.out, labels, values, a.title.empty() ? a.value_column : a.title);
  } else {
    throw Error(ErrorKind::UsageError, fmt::format("unknown plot kind '{}' (expected hist, heatmap or bars)", a.kind));
  }
  s.output(a.out);
  s.report(Json{{"plot", a.out}});
}

void write_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

Config layered_config(const Globals& g, const Environment& env) {
  Config config;
  std::string file = g.config_path;
  if (file.empty()) {
    if (const auto it = env.find("BEHAVIOR_CODEC_CONFIG"); it != env.end()) file = it->second;
  }
  if (!file.empty()) config = Config::load(file);
  const std::pair<const char*, const char*> mapping[] = {
      {"BEHAVIOR_CODEC_BACKEND", "backend"},
      {"BEHAVIOR_CODEC_SEED", "scripted.seed"},
      {"BEHAVIOR_CODEC_API_KEY", "live.api_key"},
      {"BEHAVIOR_CODEC_BASE_URL", "live.base_url"},
  };
  for (const auto& [var, key] : mapping) {
    if (const auto it = env.find(var); it != env.end() && !it->second.empty()) config.set(key, it->second);
  }
  if (!g.backend.empty()) config.set("backend", g.backend);
  if (g.backend_seed) config.set("scripted.seed", std::to_string(*g.backend_seed));
  if (!g.instructions_dir.empty()) config.set("instructions.dir", g.instructions_dir);
  return config;
}

// Fills options the user did not pass on the command line from `section.key`.
struct Fallbacks {
  const Config& config;
  CLI::App* app;
  std::string section;

  template <typename T>
  void apply(const std::string& flag, const std::string& key, T& target) const {
    if (app->count(flag) > 0) return;
    const auto v = config.get(section + "." + key);
    if (!v) return;
    if constexpr (std::is_same_v<T, std::string>) {
      target = *v;
    } else if constexpr (std::is_floating_point_v<T>) {
      target = config.get_double(section + "." + key, target);
    } else {
      target = static_cast<T>(config.get_int(section + "." + key, static_cast<long long>(target)));
    }
  }
};

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Environment& env) {
  CLI::App app{"Learn, align and analyze behavioral codes for economic games."};
  app.name("behavior_codec");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Globals globals;
  app.add_option("--config", globals.config_path, "Key-value config file");
  app.add_option("--backend", globals.backend, "scripted (offline, default) or openai");
  app.add_option("--backend-seed", globals.backend_seed, "Seed of the scripted backend");
  app.add_option("--instructions", globals.instructions_dir, "Directory of <game>.txt instruction overrides");
  app.add_option("--parallelism", globals.parallelism, "Concurrent backend sessions")->check(CLI::PositiveNumber);
  app.add_option("--manifest", globals.manifest_path, "Manifest path (default: <output>.manifest.json)");

  ElicitArgs elicit;
  auto* c_elicit = app.add_subcommand("elicit", "Learn codes for target behaviors");
  c_elicit->add_option("--game", elicit.game, "Game")->required();
  c_elicit->add_option("--targets", elicit.targets, "all, start:stop:step, or a comma list");
  c_elicit->add_option("--repeats", elicit.repeats, "Outer repeats per target")->check(CLI::PositiveNumber);
  c_elicit->add_option("--improvements", elicit.improvements, "Improvement rounds per repeat")->check(CLI::NonNegativeNumber);
  c_elicit->add_option("--samples", elicit.samples, "Samples per evaluation")->check(CLI::PositiveNumber);
  c_elicit->add_option("--out", elicit.out, "Codes JSONL")->required();
  c_elicit->add_option("--samples-out", elicit.samples_out, "Samples JSONL (default: <out>.samples.jsonl)");

  AlignArgs align_args;
  auto* c_align = app.add_subcommand("align", "Fit mixture weights to a target distribution");
  c_align->add_option("--game", align_args.game, "Game")->required();
  c_align->add_option("--codes", align_args.codes, "Codes JSONL")->required();
  c_align->add_option("--samples", align_args.samples, "Samples JSONL (default: beside codes)");
  c_align->add_option("--target", align_args.target, "Target distribution CSV")->required();
  c_align->add_option("--alpha", align_args.alpha, "Norm penalty")->check(CLI::NonNegativeNumber);
  c_align->add_option("--tol", align_args.tolerance, "Loss improvement tolerance")->check(CLI::PositiveNumber);
  c_align->add_option("--seed", align_args.seed, "Restart seed");
  c_align->add_option("--max-restarts", align_args.max_restarts, "Restart cap")->check(CLI::PositiveNumber);
  c_align->add_option("--samples-per-code", align_args.samples_per_code, "Samples elicited for uncached codes")
      ->check(CLI::PositiveNumber);
  c_align->add_option("--norm", align_args.norm, "l2 or l1");
  c_align->add_option("--out", align_args.out, "Mixture JSONL")->required();

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Compare a mixture's elicited distribution with a target");
  c_eval->add_option("--mixture", eval.mixture, "Mixture JSONL")->required();
  c_eval->add_option("--target", eval.target, "Target distribution CSV")->required();
  c_eval->add_option("--eval-samples", eval.eval_samples, "Draws from the mixture");
  c_eval->add_option("--bin", eval.bin, "Relaxed KS bin width (default 5, 2 for public goods)");
  c_eval->add_option("--seed", eval.seed, "Sampling seed");
  c_eval->add_flag("--cached", eval.cached, "Draw from cached samples instead of re-eliciting");
  c_eval->add_option("--out", eval.out, "Report JSON");
  c_eval->add_option("--elicited-out", eval.elicited_out, "Elicited distribution CSV");

  EvaluateArgs transfer;
  auto* c_transfer = app.add_subcommand("transfer", "Play a mixture in another game");
  c_transfer->add_option("--mixture", transfer.mixture, "Mixture JSONL")->required();
  c_transfer->add_option("--target-game", transfer.target_game, "Game to play")->required();
  c_transfer->add_option("--target", transfer.target, "Target distribution CSV")->required();
  c_transfer->add_option("--eval-samples", transfer.eval_samples, "Draws from the mixture");
  c_transfer->add_option("--bin", transfer.bin, "Relaxed KS bin width");
  c_transfer->add_option("--seed", transfer.seed, "Sampling seed");
  c_transfer->add_option("--out", transfer.out, "Report JSON");
  c_transfer->add_option("--elicited-out", transfer.elicited_out, "Elicited distribution CSV");

  KeywordArgs kw;
  auto* c_kw = app.add_subcommand("keywords", "Top TF-IDF keywords per game");
  c_kw->add_option("--codes", kw.codes, "Codes JSONL")->required();
  c_kw->add_option("--game", kw.game, "Restrict to one game");
  c_kw->add_option("--top", kw.top, "Keywords per game")->check(CLI::PositiveNumber);
  c_kw->add_option("--out", kw.out, "Keyword CSV")->required();
  c_kw->add_option("--vectors-out", kw.vectors_out, "Binary keyword vectors CSV");

  RegressArgs reg;
  auto* c_reg = app.add_subcommand("regress", "Regress mean behavior on keyword occurrence");
  c_reg->add_option("--codes", reg.codes, "Codes JSONL")->required();
  c_reg->add_option("--samples", reg.samples, "Samples JSONL (default: beside codes)");
  c_reg->add_option("--game", reg.game, "Restrict to one game");
  c_reg->add_option("--method", reg.method, "ols or lasso");
  c_reg->add_option("--lasso-alpha", reg.lasso_alpha, "LASSO penalty")->check(CLI::NonNegativeNumber);
  c_reg->add_option("--top", reg.top, "Keyword basis size")->check(CLI::PositiveNumber);
  c_reg->add_option("--rank", reg.rank, "Coefficients reported per game")->check(CLI::PositiveNumber);
  c_reg->add_option("--out", reg.out, "Coefficient CSV")->required();
  c_reg->add_option("--plot", reg.plot, "Coefficient bar chart SVG (first game)");

  PcaArgs pca_args;
  auto* c_pca = app.add_subcommand("pca", "Principal components of keyword vectors vs behavior");
  c_pca->add_option("--codes", pca_args.codes, "Codes JSONL")->required();
  c_pca->add_option("--samples", pca_args.samples, "Samples JSONL (default: beside codes)");
  c_pca->add_option("--game", pca_args.game, "Restrict to one game");
  c_pca->add_option("--k", pca_args.k, "Components")->check(CLI::PositiveNumber);
  c_pca->add_option("--top", pca_args.top, "Keyword basis size")->check(CLI::PositiveNumber);
  c_pca->add_option("--out", pca_args.out, "Component CSV")->required();
  c_pca->add_option("--loadings-out", pca_args.loadings_out, "Loadings CSV");

  EmbedArgs emb;
  auto* c_emb = app.add_subcommand("embed", "Embed code texts");
  c_emb->add_option("--codes", emb.codes, "Codes JSONL")->required();
  c_emb->add_option("--out", emb.out, "Embeddings JSONL")->required();

  SimilarityArgs sim;
  auto* c_sim = app.add_subcommand("similarity", "Game-by-game mean cosine similarity");
  c_sim->add_option("--codes", sim.codes, "Codes JSONL")->required();
  c_sim->add_option("--embeddings", sim.embeddings, "Embeddings JSONL")->required();
  c_sim->add_option("--out", sim.out, "Matrix CSV")->required();

  ConsistencyArgs cons;
  auto* c_cons = app.add_subcommand("consistency", "Per-code mean and standard deviation");
  c_cons->add_option("--codes", cons.codes, "Codes JSONL")->required();
  c_cons->add_option("--samples", cons.samples, "Samples JSONL (default: beside codes)");
  c_cons->add_option("--out", cons.out, "CSV")->required();

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot", "Deterministic SVG plots");
  c_plot->add_option("--kind", plot.kind, "hist, heatmap or bars")->required();
  c_plot->add_option("--game", plot.game, "Game (hist)");
  c_plot->add_option("--target", plot.target, "Target distribution CSV (hist)");
  c_plot->add_option("--elicited", plot.elicited, "Elicited distribution CSV (hist)");
  c_plot->add_option("--matrix", plot.matrix, "Matrix CSV (heatmap)");
  c_plot->add_option("--input", plot.input, "CSV (bars)");
  c_plot->add_option("--label-column", plot.label_column, "Label column (bars)");
  c_plot->add_option("--value-column", plot.value_column, "Value column (bars)");
  c_plot->add_option("--title", plot.title, "Title");
  c_plot->add_option("--out", plot.out, "SVG")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    write_error(err, "UsageError", e.what());
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  Session session(out);
  session.globals = globals;
  session.argv.assign(args.begin(), args.end());
  try {
    session.config = layered_config(globals, env);
    std::optional<fs::path> primary;
    CLI::App* sub = app.get_subcommands().front();
    session.command = sub->get_name();
    const Fallbacks fb{session.config, sub, session.command};
    if (sub == c_elicit) {
      fb.apply("--repeats", "repeats", elicit.repeats);
      fb.apply("--improvements", "improvements", elicit.improvements);
      fb.apply("--samples", "samples", elicit.samples);
      run_elicit(session, elicit);
      primary = elicit.out;
    } else if (sub == c_align) {
      fb.apply("--alpha", "alpha", align_args.alpha);
      fb.apply("--tol", "tolerance", align_args.tolerance);
      fb.apply("--seed", "seed", align_args.seed);
      fb.apply("--max-restarts", "max_restarts", align_args.max_restarts);
      fb.apply("--samples-per-code", "samples_per_code", align_args.samples_per_code);
      fb.apply("--norm", "norm", align_args.norm);
      run_align(session, align_args);
      primary = align_args.out;
    } else if (sub == c_eval || sub == c_transfer) {
      EvaluateArgs& a = sub == c_eval ? eval : transfer;
      fb.apply("--eval-samples", "eval_samples", a.eval_samples);
      fb.apply("--bin", "bin", a.bin);
      fb.apply("--seed", "seed", a.seed);
      run_evaluate(session, a, sub == c_transfer);
      if (!a.out.empty()) {
        primary = a.out;
      } else if (!a.elicited_out.empty()) {
        primary = a.elicited_out;
      }
    } else if (sub == c_kw) {
      fb.apply("--top", "top", kw.top);
      run_keywords(session, kw);
      primary = kw.out;
    } else if (sub == c_reg) {
      fb.apply("--method", "method", reg.method);
      fb.apply("--lasso-alpha", "lasso_alpha", reg.lasso_alpha);
      fb.apply("--top", "top", reg.top);
      run_regress(session, reg);
      primary = reg.out;
    } else if (sub == c_pca) {
      fb.apply("--k", "k", pca_args.k);
      fb.apply("--top", "top", pca_args.top);
      run_pca(session, pca_args);
      primary = pca_args.out;
    } else if (sub == c_emb) {
      run_embed(session, emb);
      primary = emb.out;
    } else if (sub == c_sim) {
      run_similarity(session, sim);
      primary = sim.out;
    } else if (sub == c_cons) {
      run_consistency(session, cons);
      primary = cons.out;
    } else if (sub == c_plot) {
      run_plot(session, plot);
      primary = plot.out;
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    session.finish(primary, elapsed);
    return 0;
  } catch (const Error& e) {
    write_error(err, to_string(e.kind()), e.what());
    return e.kind() == ErrorKind::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    write_error(err, "InternalError", e.what());
    return 1;
  }
}

}  // namespace behavior_codec
