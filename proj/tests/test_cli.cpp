#include <doctest.h>

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "behavior_codec/cli.hpp"
#include "behavior_codec/io.hpp"
#include "behavior_codec/scripted_backend.hpp"
#include "test_support.hpp"

using namespace behavior_codec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;

  [[nodiscard]] nlohmann::json report() const { return nlohmann::json::parse(out); }
};

Run run(std::vector<std::string> args, const Environment& env = {}) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err, env);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string p(const fs::path& path) { return path.string(); }

MixtureFile point_mixture(int value) {
  MixtureFile m;
  m.game = GameId::Dictator;
  BehavioralCode c;
  c.id = "dictator-t030-r1-i0";
  c.game = GameId::Dictator;
  c.target = {GameId::Dictator, value};
  c.text = compose_code({GameId::Dictator, value}, 1);
  c.created_at = "2025-01-01T00:00:00Z";
  m.library = {{c, std::vector<int>(10, value)}};
  m.weights = {{c.id}, {1.0}};
  m.norm = 1.0;
  m.loss = 3.0;
  m.attempts = 1;
  return m;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"elicit", "--game", "dictator"}).code == 2);
  CHECK(run({"align", "--game", "dictator", "--codes", "x", "--target", "y", "--out", "z", "--alpha", "-1"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("elicit") != std::string::npos);
}

TEST_CASE("pipeline failures exit with 1 and JSON on stderr") {
  const auto dir = test_support::scratch_dir("cli_fail");
  const Run r = run({"keywords", "--codes", p(dir / "missing.jsonl"), "--out", p(dir / "k.csv")});
  CHECK(r.code == 1);
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err["error"] == "IoError");
  CHECK(err.contains("message"));

  const Run bad_game = run({"elicit", "--game", "chess", "--out", p(dir / "c.jsonl")});
  CHECK(bad_game.code == 2);
  CHECK(nlohmann::json::parse(bad_game.err)["error"] == "UsageError");
}

TEST_CASE("evaluate on an identical fixture reports zero distance") {
  const auto dir = test_support::scratch_dir("cli_eval");
  save_mixture(dir / "mix.jsonl", point_mixture(30));
  write_text_atomic(dir / "target.csv", "value,count\n30,25\n");
  const Run r = run({"evaluate", "--mixture", p(dir / "mix.jsonl"), "--target", p(dir / "target.csv"), "--cached",
                     "--out", p(dir / "report.json")});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["wasserstein"] == 0.0);
  CHECK(j["ks"]["p_value"] == 1.0);
  CHECK(j["relaxed_ks"]["p_value"] == 1.0);
  CHECK(j["bin_width"] == 5);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "report.json.manifest.json"));
  const auto manifest = nlohmann::json::parse(read_text(dir / "report.json.manifest.json"));
  CHECK(manifest["command"] == "evaluate");
  CHECK(manifest["inputs"].size() == 2);

  const Run transfer_cached = run({"transfer", "--mixture", p(dir / "mix.jsonl"), "--target-game", "bomb", "--target",
                                   p(dir / "target.csv"), "--cached"});
  CHECK(transfer_cached.code == 2);
}

TEST_CASE("elicit, align and evaluate end to end") {
  const auto dir = test_support::scratch_dir("cli_pipeline");
  const Run elicit = run({"elicit", "--game", "dictator", "--targets", "0:100:10", "--repeats", "2", "--out",
                          p(dir / "codes.jsonl")});
  REQUIRE(elicit.code == 0);
  CHECK(elicit.report()["codes"].get<int>() >= 22);
  CHECK(fs::exists(dir / "codes.samples.jsonl"));
  CHECK(fs::exists(dir / "codes.jsonl.manifest.json"));

  write_text_atomic(dir / "target.csv", "value,count\n20,30\n50,40\n80,30\n");
  const Run align = run({"align", "--game", "dictator", "--codes", p(dir / "codes.jsonl"), "--target",
                         p(dir / "target.csv"), "--seed", "3", "--out", p(dir / "mix.jsonl")});
  REQUIRE(align.code == 0);
  CHECK(align.report()["wasserstein"].get<double>() < 2.0);

  const Run eval = run({"evaluate", "--mixture", p(dir / "mix.jsonl"), "--target", p(dir / "target.csv"),
                        "--elicited-out", p(dir / "elicited.csv")});
  REQUIRE(eval.code == 0);
  CHECK(eval.report()["wasserstein"].get<double>() <= 2.0);
  CHECK(eval.report()["sample_count"] == 1000);

  const Run plot = run({"plot", "--kind", "hist", "--game", "dictator", "--target", p(dir / "target.csv"),
                        "--elicited", p(dir / "elicited.csv"), "--out", p(dir / "hist.svg")});
  REQUIRE(plot.code == 0);
  CHECK(read_text(dir / "hist.svg").find("class=\"elicited\"") != std::string::npos);

  const Run cons = run({"consistency", "--codes", p(dir / "codes.jsonl"), "--out", p(dir / "cons.csv")});
  REQUIRE(cons.code == 0);
  CHECK(read_text(dir / "cons.csv").starts_with("code_id,mean,std_dev,n\n"));

  const Run embed = run({"embed", "--codes", p(dir / "codes.jsonl"), "--out", p(dir / "emb.jsonl")});
  REQUIRE(embed.code == 0);
  const Run sim = run({"similarity", "--codes", p(dir / "codes.jsonl"), "--embeddings", p(dir / "emb.jsonl"),
                       "--out", p(dir / "sim.csv")});
  REQUIRE(sim.code == 0);
  const std::string matrix = read_text(dir / "sim.csv");
  CHECK(std::count(matrix.begin(), matrix.end(), '\n') == 8);
  const Run heat = run({"plot", "--kind", "heatmap", "--matrix", p(dir / "sim.csv"), "--out", p(dir / "sim.svg")});
  REQUIRE(heat.code == 0);
}

TEST_CASE("environment sits between the config file and flags") {
  const auto dir = test_support::scratch_dir("cli_env");
  write_text_atomic(dir / "bc.conf", "scripted.seed = 5\n");
  auto backend_of = [&](const std::vector<std::string>& extra, const Environment& env) {
    std::vector<std::string> args = extra;
    for (const char* a : {"elicit", "--game", "dictator", "--targets", "50", "--repeats", "1"}) args.emplace_back(a);
    args.push_back("--out");
    args.push_back(p(dir / "c.jsonl"));
    const Run r = run(args, env);
    REQUIRE(r.code == 0);
    return load_samples(dir / "c.samples.jsonl").at(0).backend_id;
  };
  CHECK(backend_of({"--config", p(dir / "bc.conf")}, {}) == "scripted-seed5");
  CHECK(backend_of({"--config", p(dir / "bc.conf")}, {{"BEHAVIOR_CODEC_SEED", "6"}}) == "scripted-seed6");
  CHECK(backend_of({"--config", p(dir / "bc.conf"), "--backend-seed", "7"}, {{"BEHAVIOR_CODEC_SEED", "6"}}) ==
        "scripted-seed7");
  CHECK(backend_of({}, {{"BEHAVIOR_CODEC_CONFIG", p(dir / "bc.conf")}}) == "scripted-seed5");
}

TEST_CASE("openai backend without a key fails cleanly") {
  const auto dir = test_support::scratch_dir("cli_live");
  const Run r = run({"--backend", "openai", "elicit", "--game", "dictator", "--targets", "50", "--repeats", "1",
                     "--out", p(dir / "c.jsonl")},
                    {{"BEHAVIOR_CODEC_BASE_URL", "http://127.0.0.1:1"}});
  CHECK(r.code == 0);
  const auto j = r.report();
  CHECK(j["failures"].size() == 1);
  CHECK(j["failures"][0]["error"] == "AuthError");
}
