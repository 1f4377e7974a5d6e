#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "partisan/commands.hpp"

using namespace partisan;
namespace fs = std::filesystem;

namespace {

const std::string kData = PARTISAN_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

RunConfig planted_config(const fs::path& out) {
  RunConfig c;
  c.fixture = kData + "/planted.jsonl";
  c.ground_truth = kData + "/planted_bloc.txt";
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST(ParseRanges, Forms) {
  auto r = parse_ranges("1-362,257-362");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], (ProposalRange{1, 362}));
  EXPECT_EQ(r[1], (ProposalRange{257, 362}));
  EXPECT_EQ(parse_ranges("7"), (std::vector<ProposalRange>{{7, 7}}));
  EXPECT_THROW(parse_ranges("5-x"), ConfigError);
  EXPECT_THROW(parse_ranges("9-3"), ConfigError);
}

TEST(Config, JsonAndValidation) {
  auto c = config_from_json(json{{"dao", "nouns"}, {"window_size", 12}, {"ranges", {"1-10"}}});
  EXPECT_EQ(c.dao, "nouns");
  EXPECT_EQ(c.window_size, 12u);
  EXPECT_THROW(config_from_json(json{{"windw", 3}}), ConfigError);
  RunConfig bad;
  bad.k_min = 1;
  EXPECT_THROW(validate_config(bad), ConfigError);
  bad = {};
  bad.participation_threshold = 1.5;
  EXPECT_THROW(validate_config(bad), ConfigError);
}

TEST(Commands, MissingFixture) {
  TempDir t("partisan_cmd_missing");
  RunConfig c;
  c.output_dir = t.path.string();
  EXPECT_THROW(cmd_friction(c), MissingArtifact);
}

TEST(Commands, ValidateNeedsGroundTruth) {
  TempDir t("partisan_cmd_nogt");
  auto c = planted_config(t.path);
  c.ground_truth.clear();
  EXPECT_THROW(cmd_validate(c), ConfigError);
}

TEST(Commands, AnalyzeWritesArtifacts) {
  TempDir t("partisan_cmd_analyze");
  auto c = planted_config(t.path);
  auto run = cmd_analyze(c);
  EXPECT_EQ(run.proposals.size(), 59u);
  const auto dir = c.dao_dir();
  for (const char* f : {"matrix.csv", "embeddings.csv", "clusters.csv", "analysis.json", "charts/k_star.svg",
                        "fork_share.csv", "charts/fork_clusters.svg", "mds/2.svg", "dissim/60.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  auto analysis = json::parse(slurp(dir / "analysis.json"));
  std::size_t analysed = 0;
  for (const auto& p : run.proposals) analysed += p.analysed();
  EXPECT_EQ(analysed, run.clusterings().size());
  EXPECT_GT(analysed, 50u);
  EXPECT_FALSE(analysis.empty());
}

TEST(Commands, ValidateZeroIterations) {
  TempDir t("partisan_cmd_validate");
  auto c = planted_config(t.path);
  c.iterations = 0;
  c.split_at = 30;
  auto rep = cmd_validate(c);
  EXPECT_TRUE(rep.seeds.empty());
  auto doc = json::parse(slurp(c.dao_dir() / "validation.json"));
  EXPECT_EQ(doc["iterations"], 0);
  EXPECT_TRUE(doc.contains("participation"));
}

TEST(Commands, IngestFromTraceReproducesFixture) {
  TempDir t("partisan_cmd_ingest");
  const auto registry = bundled_registry();
  const auto* entry = find_registry_entry(registry, "planted");
  ASSERT_NE(entry, nullptr);
  auto sig = EventSignature::parse(entry->event_signatures.front());
  auto events = load_fixture(kData + "/planted.jsonl");
  json trace = json::array();
  for (const auto& e : events) trace.push_back(raw_log_to_json(encode_vote_event(e, sig, entry->governance_contract)));
  ReplayTransport transport(trace);
  RunConfig c;
  c.output_dir = t.path.string();
  c.chunk_size = 777;
  auto path = cmd_ingest(c, transport);
  EXPECT_EQ(path, (t.path / "planted" / "events.jsonl").string());
  EXPECT_EQ(slurp(path), slurp(kData + "/planted.jsonl"));
}

TEST(Commands, BundledDataMatchesGenerator) {
  TempDir t("partisan_cmd_synth");
  fs::create_directories(t.path);
  cmd_synth({}, (t.path / "p.jsonl").string(), (t.path / "b.txt").string());
  EXPECT_EQ(slurp(t.path / "p.jsonl"), slurp(kData + "/planted.jsonl"));
  EXPECT_EQ(slurp(t.path / "b.txt"), slurp(kData + "/planted_bloc.txt"));
}
