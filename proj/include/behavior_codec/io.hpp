#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "behavior_codec/alignment.hpp"
#include "behavior_codec/analysis.hpp"
#include "behavior_codec/distribution.hpp"
#include "behavior_codec/elicitation.hpp"
#include "behavior_codec/games.hpp"

namespace behavior_codec {

/// Whole-file read. Throws Error(IoError).
std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

/// One JSON object per line. Blank lines are ignored; a malformed line
/// raises Error(SchemaViolation) naming its 1-based line number.
std::string codes_to_jsonl(std::span<const BehavioralCode> codes);
std::vector<BehavioralCode> codes_from_jsonl(std::string_view content);
void save_codes(const std::filesystem::path& path, std::span<const BehavioralCode> codes);
std::vector<BehavioralCode> load_codes(const std::filesystem::path& path);

std::string samples_to_jsonl(std::span<const SampleSet> samples);
std::vector<SampleSet> samples_from_jsonl(std::string_view content);
void save_samples(const std::filesystem::path& path, std::span<const SampleSet> samples);
std::vector<SampleSet> load_samples(const std::filesystem::path& path);

/// A fitted mixture with its library, self-contained so it can be
/// evaluated or transferred later without the original code files.
struct MixtureFile {
  GameId game = GameId::Dictator;
  AlignmentConfig config;
  double loss = 0.0;
  double wasserstein = 0.0;
  double norm = 0.0;
  int attempts = 0;
  CodeLibrary library;
  MixtureWeights weights;
};

/// First line: {"kind":"metadata",...}; then one row per code with its
/// weight, text and cached samples.
std::string mixture_to_jsonl(const MixtureFile& mixture);
MixtureFile mixture_from_jsonl(std::string_view content);
void save_mixture(const std::filesystem::path& path, const MixtureFile& mixture);
MixtureFile load_mixture(const std::filesystem::path& path);

/// CSV with a `value` or `value,count` header. Throws Error(ParseError) for
/// malformed rows and Error(OffGridValue) for values outside the game's grid.
EmpiricalDistribution distribution_from_csv(std::string_view content, GameId game);
EmpiricalDistribution load_distribution(const std::filesystem::path& path, GameId game);
/// `value,count` rows with counts reconstructed from observations when known,
/// masses otherwise.
std::string distribution_to_csv(const EmpiricalDistribution& dist);
void save_distribution(const std::filesystem::path& path, const EmpiricalDistribution& dist);

std::string embeddings_to_jsonl(std::span<const CodeEmbedding> embeddings);
std::vector<CodeEmbedding> embeddings_from_jsonl(std::string_view content);
void save_embeddings(const std::filesystem::path& path, std::span<const CodeEmbedding> embeddings);
std::vector<CodeEmbedding> load_embeddings(const std::filesystem::path& path);

/// RFC 4180 line with quoting where needed; no trailing newline.
std::string csv_row(std::span<const std::string> cells);

}  // namespace behavior_codec
