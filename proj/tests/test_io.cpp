#include <doctest.h>

#include <fstream>

#include "behavior_codec/io.hpp"
#include "behavior_codec/manifest.hpp"
#include "behavior_codec/scripted_backend.hpp"
#include "behavior_codec/util.hpp"
#include "test_support.hpp"

using namespace behavior_codec;
using test_support::kind_of;

namespace {

std::vector<BehavioralCode> generated_codes(util::Rng& rng, int n) {
  std::vector<BehavioralCode> out;
  for (int i = 0; i < n; ++i) {
    const GameId g = kAllGames[static_cast<std::size_t>(rng.uniform_int(0, 6))];
    const ActionSpace& s = scenario(g).action_space;
    BehavioralCode c;
    c.game = g;
    c.target = {g, static_cast<int>(rng.uniform_int(s.min, s.max))};
    c.repeat_index = static_cast<int>(rng.uniform_int(1, 5));
    c.improve_index = static_cast<int>(rng.uniform_int(0, 3));
    c.id = make_code_id(g, c.target.value, c.repeat_index, c.improve_index);
    if (c.improve_index > 0) c.parent_id = make_code_id(g, c.target.value, c.repeat_index, c.improve_index - 1);
    c.text = compose_code({g, c.target.value}, rng.next());
    if (i % 3 == 0) c.text += " Quotes \" and \\ backslashes\nand a newline, été.";
    c.created_at = "2025-01-01T00:00:00Z";
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("codes round-trip through JSONL") {
  util::Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto codes = generated_codes(rng, static_cast<int>(rng.uniform_int(0, 30)));
    CHECK(codes_from_jsonl(codes_to_jsonl(codes)) == codes);
  }
  const auto dir = test_support::scratch_dir("io_codes");
  const auto codes = generated_codes(rng, 5);
  save_codes(dir / "nested" / "codes.jsonl", codes);
  CHECK(load_codes(dir / "nested" / "codes.jsonl") == codes);
  {
    std::ofstream(dir / "empty.jsonl");
  }
  CHECK(load_codes(dir / "empty.jsonl").empty());
  CHECK(kind_of([&] { (void)load_codes(dir / "missing.jsonl"); }) == ErrorKind::IoError);
}

TEST_CASE("schema violations name the line") {
  util::Rng rng(1);
  const auto codes = generated_codes(rng, 3);
  std::string text = codes_to_jsonl(codes);
  const auto second = text.find('\n') + 1;
  const auto third = text.find('\n', second);
  std::string line = text.substr(second, third - second);
  const auto key = line.find("\"text\"");
  const auto next = line.find(",\"parent_id\"");
  line.erase(key, next - key + 1);
  text.replace(second, third - second, line);
  try {
    (void)codes_from_jsonl(text);
    FAIL("expected SchemaViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaViolation);
    CHECK(e.location() == 2);
  }
  CHECK(kind_of([] { (void)codes_from_jsonl("\n{not json}\n"); }) == ErrorKind::SchemaViolation);
  CHECK(kind_of([] {
          (void)codes_from_jsonl(
              R"({"id":"x","game":"dictator","target":500,"text":"You are.","parent_id":null,"repeat_index":1,"improve_index":0,"created_at":""})");
        }) == ErrorKind::SchemaViolation);
}

TEST_CASE("samples round-trip") {
  const std::vector<SampleSet> s{{"a", GameId::Dictator, {1, 2, 3}, "scripted-seed0", 1},
                                 {"b", GameId::PublicGoods, {20}, "scripted-seed0", 0}};
  CHECK(samples_from_jsonl(samples_to_jsonl(s)) == s);
  CHECK(kind_of([] {
          (void)samples_from_jsonl(
              R"({"code_id":"a","game":"public_goods","values":[30],"backend_id":"x","missing_count":0})");
        }) == ErrorKind::SchemaViolation);
}

TEST_CASE("mixture files are self-contained") {
  MixtureFile m;
  m.game = GameId::Bomb;
  m.config.alpha = 2.5;
  m.config.rng_seed = 9;
  m.config.norm = NormKind::L1;
  m.loss = 3.25;
  m.wasserstein = 0.75;
  m.norm = 1.0;
  m.attempts = 1;
  BehavioralCode c;
  c.id = "bomb-t040-r1-i0";
  c.game = GameId::Bomb;
  c.target = {GameId::Bomb, 40};
  c.text = compose_code({GameId::Bomb, 40}, 1);
  c.created_at = "2025-01-01T00:00:00Z";
  m.library = {{c, {39, 40, 41}}};
  m.weights = {{c.id}, {1.0}};
  const std::string text = mixture_to_jsonl(m);
  CHECK(text.starts_with("{\"kind\":\"metadata\""));
  const MixtureFile back = mixture_from_jsonl(text);
  CHECK(back.game == GameId::Bomb);
  CHECK(back.config.alpha == 2.5);
  CHECK(back.config.rng_seed == 9);
  CHECK(back.config.norm == NormKind::L1);
  CHECK(back.loss == 3.25);
  CHECK(back.library[0].code == c);
  CHECK(back.library[0].samples == std::vector<int>{39, 40, 41});
  CHECK(back.weights.w == std::vector<double>{1.0});
  CHECK(mixture_to_jsonl(back) == text);
}

TEST_CASE("distribution CSV examples") {
  const auto raw = distribution_from_csv("value\n0\n50\n50\n100\n", GameId::Dictator);
  CHECK(raw.support() == std::vector<int>{0, 50, 100});
  CHECK(raw.masses() == std::vector<double>{0.25, 0.5, 0.25});
  const auto counted = distribution_from_csv("value,count\n0,3\n10,1\n", GameId::Dictator);
  CHECK(counted.masses() == std::vector<double>{0.75, 0.25});
  CHECK(counted.observations() == 4.0);
  try {
    (void)distribution_from_csv("value\n5\n103\n", GameId::Dictator);
    FAIL("expected OffGridValue");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OffGridValue);
    CHECK(e.location() == 3);
  }
  CHECK(kind_of([] { (void)distribution_from_csv("score\n5\n", GameId::Dictator); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { (void)distribution_from_csv("value\nfive\n", GameId::Dictator); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { (void)distribution_from_csv("value,count\n5,-1\n", GameId::Dictator); }) ==
        ErrorKind::ParseError);
  CHECK(distribution_from_csv(distribution_to_csv(counted), GameId::Dictator).masses() == counted.masses());
}

TEST_CASE("csv rows quote where needed") {
  const std::vector<std::string> cells{"plain", "with,comma", "say \"hi\"", ""};
  CHECK(csv_row(cells) == "plain,\"with,comma\",\"say \"\"hi\"\"\",");
}

TEST_CASE("embeddings round-trip") {
  const std::vector<CodeEmbedding> e{{"a", {{0.1, -2.5, 1e-300}, "scripted-seed0"}}};
  const auto back = embeddings_from_jsonl(embeddings_to_jsonl(e));
  REQUIRE(back.size() == 1);
  CHECK(back[0].embedding.values == e[0].embedding.values);
  CHECK(back[0].embedding.backend_id == "scripted-seed0");
}

TEST_CASE("format_number round-trips doubles") {
  util::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.uniform_int(-10, 10)));
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(3.0) == "3");
}

TEST_CASE("atomic writes replace the file") {
  const auto dir = test_support::scratch_dir("io_atomic");
  write_text_atomic(dir / "a.txt", "first");
  write_text_atomic(dir / "a.txt", "second");
  CHECK(read_text(dir / "a.txt") == "second");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
}

TEST_CASE("manifests hash inputs and outputs") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto dir = test_support::scratch_dir("io_manifest");
  write_text_atomic(dir / "in.txt", "abc");
  RunManifest m;
  m.command = "align";
  m.config = {{"alpha", "3"}};
  m.add_input(dir / "in.txt");
  CHECK(m.inputs[0].sha256 == sha256_hex("abc"));
  const std::string id = m.run_id();
  CHECK(id.size() == 16);
  RunManifest again = m;
  again.timings_ms = {{"total", 12.5}};
  CHECK(again.run_id() == id);
  again.config = {{"alpha", "4"}};
  CHECK(again.run_id() != id);
  CHECK(m.to_json().find("\"run_id\"") != std::string::npos);
  CHECK(manifest_path_for(dir / "out.csv").filename() == "out.csv.manifest.json");
}
