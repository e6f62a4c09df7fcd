#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "fcm/corpus.hpp"
#include "fcm/error.hpp"
#include "fcm/pipeline.hpp"
#include "fcm/synthgen.hpp"
#include "test_util.hpp"

using namespace fcm;
using namespace fcm::pipeline;
namespace fs = std::filesystem;
using fcm::testing::TempDir;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_corpus(TempDir& tmp, std::size_t docs = 120, std::uint64_t seed = 42) {
  synthgen::PlantedSpec spec;
  spec.docs = docs;
  spec.seed = seed;
  tmp.write("input.jsonl", corpus::to_jsonl(synthgen::generate_corpus(spec).records));
  return tmp / "input.jsonl";
}

Config config_for(const fs::path& input) {
  Config c;
  c.input = input;
  return c;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FCM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Pipeline, FullRunWritesContractFiles) {
  TempDir tmp;
  const auto run = tmp / "run";
  const auto m = run_all(config_for(write_corpus(tmp)), run);
  for (const char* f : {kRecordsFile, kStatsFile, kTokensFile, kPreprocessReport, kVocabFile, kMatrixFile,
                        kConceptsFile, kManifestFile, "factors/manifest.json", "factors/g.f64", "factors/s.f64",
                        "factors/d.f64"})
    EXPECT_TRUE(fs::exists(run / f)) << f;
  EXPECT_FALSE(fs::exists(run / ".lock"));
  EXPECT_EQ(m.stages_completed,
            (std::vector<std::string>{"ingest", "preprocess", "vectorize", "decompose", "report"}));
  EXPECT_TRUE(std::regex_match(m.run_id, std::regex("run-[0-9a-f]{12}")));
  for (Stage s : kStages) {
    EXPECT_EQ(m.input_digest.at(std::string(to_string(s))).size(), 64u);
    EXPECT_TRUE(m.config_snapshot.contains(std::string(to_string(s))));
  }

  const auto concepts = nlohmann::json::parse(slurp(run / kConceptsFile));
  EXPECT_EQ(concepts["k"], 10);
  ASSERT_EQ(concepts["concepts"].size(), 10u);
  EXPECT_EQ(concepts["concepts"][0]["name"], "AC1");
  EXPECT_EQ(concepts["concepts"][9]["name"], "AC10");
  EXPECT_EQ(concepts["concepts"][0]["terms"].size(), 25u);

  const auto back = read_manifest(run);
  EXPECT_EQ(nlohmann::json(back.to_json()), nlohmann::json(m.to_json()));
}

TEST(Pipeline, MissingPrerequisite) {
  TempDir tmp;
  const auto cfg = config_for(write_corpus(tmp));
  EXPECT_THROW(run_stage(Stage::decompose, cfg, tmp / "run"), MissingPrerequisite);
  run_stage(Stage::ingest, cfg, tmp / "run");
  EXPECT_THROW(run_stage(Stage::vectorize, cfg, tmp / "run"), MissingPrerequisite);
  run_stage(Stage::preprocess, cfg, tmp / "run");
  EXPECT_NO_THROW(run_stage(Stage::vectorize, cfg, tmp / "run"));
}

TEST(Pipeline, DictionaryEditMakesLaterStagesStale) {
  TempDir tmp;
  auto cfg = config_for(write_corpus(tmp));
  tmp.write("stop.txt", "the\n");
  cfg.stopwords = tmp / "stop.txt";
  run_all(cfg, tmp / "run");
  tmp.write("stop.txt", "the\nannular\n");
  EXPECT_THROW(run_stage(Stage::vectorize, cfg, tmp / "run"), StaleArtifact);
  EXPECT_THROW(run_stage(Stage::report, cfg, tmp / "run"), StaleArtifact);
  run_stage(Stage::preprocess, cfg, tmp / "run");
  EXPECT_NO_THROW(run_stage(Stage::vectorize, cfg, tmp / "run"));
}

TEST(Pipeline, InputEditMakesIngestDependentsStale) {
  TempDir tmp;
  const auto input = write_corpus(tmp);
  const auto cfg = config_for(input);
  run_all(cfg, tmp / "run");
  fs::remove(tmp / "run" / kRecordsFile);
  EXPECT_THROW(run_stage(Stage::preprocess, cfg, tmp / "run"), StaleArtifact);
}

TEST(Pipeline, RerunIsNoOp) {
  TempDir tmp;
  const auto cfg = config_for(write_corpus(tmp));
  const auto first = run_all(cfg, tmp / "run");
  const auto before = tree(tmp / "run");
  const auto mtime = fs::last_write_time(tmp / "run" / kConceptsFile);
  const auto second = run_all(cfg, tmp / "run");
  EXPECT_EQ(second.completed_at, first.completed_at);
  EXPECT_EQ(tree(tmp / "run"), before);
  EXPECT_EQ(fs::last_write_time(tmp / "run" / kConceptsFile), mtime);
}

TEST(Pipeline, ConfigChangeRerunsStage) {
  TempDir tmp;
  auto cfg = config_for(write_corpus(tmp));
  run_all(cfg, tmp / "run");
  cfg.k = 3;
  // Earlier stages are judged by their recorded config; report alone keeps 10.
  run_stage(Stage::report, cfg, tmp / "run");
  EXPECT_EQ(nlohmann::json::parse(slurp(tmp / "run" / kConceptsFile))["concepts"].size(), 10u);
  run_stage(Stage::decompose, cfg, tmp / "run");
  run_stage(Stage::report, cfg, tmp / "run");
  const auto concepts = nlohmann::json::parse(slurp(tmp / "run" / kConceptsFile));
  EXPECT_EQ(concepts["concepts"].size(), 3u);
  EXPECT_EQ(slurp(tmp / "run" / "factors" / "s.f64").size(), 3 * sizeof(double));
}

TEST(Pipeline, ByteDeterministicAcrossRuns) {
  TempDir tmp;
  const auto cfg = config_for(write_corpus(tmp));
  const auto a = run_all(cfg, tmp / "a");
  const auto b = run_all(cfg, tmp / "b");
  auto ta = tree(tmp / "a"), tb = tree(tmp / "b");
  ta.erase(kManifestFile);
  tb.erase(kManifestFile);
  EXPECT_EQ(ta, tb);
  auto ja = a.to_json(), jb = b.to_json();
  ja.erase("completed_at");
  jb.erase("completed_at");
  EXPECT_EQ(ja, jb);
}

TEST(Pipeline, IterativeMethodMatchesExactSpectrum) {
  TempDir tmp;
  auto cfg = config_for(write_corpus(tmp));
  cfg.method = "exact";
  run_all(cfg, tmp / "exact");
  cfg.method = "iterative";
  run_all(cfg, tmp / "iter");
  const auto e = nlohmann::json::parse(slurp(tmp / "exact" / kConceptsFile))["singular_values"];
  const auto i = nlohmann::json::parse(slurp(tmp / "iter" / kConceptsFile))["singular_values"];
  ASSERT_EQ(e.size(), i.size());
  for (std::size_t n = 0; n < e.size(); ++n)
    EXPECT_NEAR(i[n].get<double>(), e[n].get<double>(), 1e-6 * e[0].get<double>());
}

TEST(Pipeline, EmptyInput) {
  TempDir tmp;
  tmp.write("empty.jsonl", "");
  EXPECT_THROW(run_all(config_for(tmp / "empty.jsonl"), tmp / "run"), EmptyFile);
}

TEST(Pipeline, LockExcludesSecondWriter) {
  TempDir tmp;
  const auto cfg = config_for(write_corpus(tmp));
  {
    RunLock held(tmp / "run");
    try {
      run_stage(Stage::ingest, cfg, tmp / "run");
      FAIL() << "expected RunLocked";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "RunLocked");
    }
  }
  EXPECT_NO_THROW(run_stage(Stage::ingest, cfg, tmp / "run"));
}

TEST(Config, MergeAndUnknownKeys) {
  Config c;
  c.merge_json({{"k", 4}, {"min_df", 0.05}, {"sigma_scaled", true}});
  EXPECT_EQ(c.k, 4u);
  EXPECT_EQ(c.min_df, 0.05);
  EXPECT_TRUE(c.sigma_scaled);
  EXPECT_EQ(c.seed, 42u);
  try {
    c.merge_json({{"kk", 4}});
    FAIL() << "expected BadConfig";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "BadConfig");
  }
  EXPECT_EQ(c.stage_json(Stage::decompose)["k"], 4);
  EXPECT_FALSE(c.stage_json(Stage::decompose).contains("min_df"));
}

TEST(Cli, ExitCodes) {
  TempDir tmp;
  const auto input = write_corpus(tmp);
  const std::string run = "--run " + (tmp / "run").string();
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  EXPECT_EQ(run_cli(run + " decompose"), 3);  // nothing ingested
  tmp.write("empty.jsonl", "");
  EXPECT_EQ(run_cli("--run " + (tmp / "e").string() + " ingest --input " + (tmp / "empty.jsonl").string()), 3);
  EXPECT_EQ(run_cli(run + " run --input " + input.string()), 0);
  EXPECT_EQ(run_cli(run + " decompose --k 100000 --exact"), 2);  // KTooLarge
  EXPECT_EQ(run_cli("--run " + (tmp / "missing").string() + " serve --port 0 --host 127.0.0.1"), 3);
}

TEST(Cli, CommandLineOverridesConfigFile) {
  TempDir tmp;
  const auto input = write_corpus(tmp);
  tmp.write("cfg.json", R"({"k": 4, "terms": 5})");
  const std::string base = "--config " + (tmp / "cfg.json").string() + " ";
  ASSERT_EQ(run_cli(base + "--run " + (tmp / "a").string() + " run --input " + input.string()), 0);
  ASSERT_EQ(run_cli(base + "--run " + (tmp / "b").string() + " run --k 3 --input " + input.string()), 0);
  const auto a = nlohmann::json::parse(slurp(tmp / "a" / kConceptsFile));
  const auto b = nlohmann::json::parse(slurp(tmp / "b" / kConceptsFile));
  EXPECT_EQ(a["concepts"].size(), 4u);
  EXPECT_EQ(a["concepts"][0]["terms"].size(), 5u);
  EXPECT_EQ(b["concepts"].size(), 3u);
  EXPECT_EQ(b["concepts"][0]["terms"].size(), 5u);

  tmp.write("bad.json", R"({"topics": 3})");
  EXPECT_EQ(run_cli("--config " + (tmp / "bad.json").string() + " --run " + (tmp / "c").string() +
                    " run --input " + input.string()),
            2);
}

TEST(Cli, SynthAndScore) {
  TempDir tmp;
  const auto out = tmp / "planted.jsonl", truth = tmp / "truth.json";
  ASSERT_EQ(run_cli("synth --out " + out.string() + " --truth " + truth.string()), 0);
  ASSERT_EQ(run_cli("--run " + (tmp / "run").string() + " run --input " + out.string()), 0);
  EXPECT_EQ(run_cli("--run " + (tmp / "run").string() + " score --truth " + truth.string()), 0);
}
