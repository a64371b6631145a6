#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <unistd.h>

#include "cli/cli.hpp"
#include "fixtures.hpp"

namespace kgsumm::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Runs the whole pipeline once into `root`.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new fs::path(fs::temp_directory_path() /
                         ("kgsumm_cli_" + std::to_string(::getpid())));
    fs::create_directories(*root_);
    training::TrainConfig c = testing::tiny_config();
    c.max_steps = 3;
    std::ofstream(*root_ / "tiny.cfg") << c.to_text();
    for (const char* run : {"a", "b"}) pipeline(*root_ / run);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*root_);
    delete root_;
  }

  static void pipeline(const fs::path& dir) {
    const std::string d = dir.string(), cfg = (*root_ / "tiny.cfg").string();
    const std::string corpus = d + "/syn/corpus.jsonl", cooc = d + "/syn/cooc.tsv";
    auto& codes = codes_[d];
    codes.push_back(invoke({"gen-synthetic", "--out", d + "/syn", "--docs", "16", "--sentences",
                            "6", "--entities", "4", "--seed", "3"})
                        .code);
    codes.push_back(
        invoke({"build-graphs", "--corpus", corpus, "--cooc", cooc, "--out", d + "/graphs"}).code);
    codes.push_back(invoke({"stats", "--corpus", corpus, "--out", d + "/stats"}).code);
    codes.push_back(invoke({"partition", "--corpus", corpus, "--out", d + "/part", "--density",
                            "<0.7", "--density", ">=0.7"})
                        .code);
    codes.push_back(invoke({"train-selector", "--corpus", corpus, "--cooc", cooc, "--config", cfg,
                            "--out", d + "/sel"})
                        .code);
    codes.push_back(invoke({"train-generator", "--corpus", corpus, "--cooc", cooc, "--checkpoint",
                            d + "/sel/checkpoint.bin", "--out", d + "/gen"})
                        .code);
    codes.push_back(invoke({"train-rl", "--corpus", corpus, "--cooc", cooc, "--checkpoint",
                            d + "/gen/checkpoint.bin", "--out", d + "/rl"})
                        .code);
    codes.push_back(invoke({"summarize", "--corpus", corpus, "--cooc", cooc, "--checkpoint",
                            d + "/rl/checkpoint.bin", "--out", d + "/sum"})
                        .code);
    codes.push_back(invoke({"evaluate", "--corpus", corpus, "--cooc", cooc, "--checkpoint",
                            d + "/rl/checkpoint.bin", "--out", d + "/eval", "--split", "all"})
                        .code);
  }

  static fs::path* root_;
  static std::map<std::string, std::vector<int>> codes_;
};

fs::path* CliPipeline::root_ = nullptr;
std::map<std::string, std::vector<int>> CliPipeline::codes_;

TEST_F(CliPipeline, EveryCommandSucceeds) {
  for (const auto& [dir, codes] : codes_) {
    ASSERT_EQ(codes.size(), 9u);
    for (std::size_t i = 0; i < codes.size(); ++i) EXPECT_EQ(codes[i], 0) << dir << " #" << i;
  }
}

TEST_F(CliPipeline, OutputsAreByteIdenticalAcrossRuns) {
  std::size_t compared = 0;
  const fs::path a = *root_ / "a";
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    if (rel.filename() == "run.json") continue;
    EXPECT_EQ(read_file(entry.path()), read_file(*root_ / "b" / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 15u);
}

TEST_F(CliPipeline, ManifestsRecordInputsAndOutputs) {
  const std::string manifest = read_file(*root_ / "a" / "sel" / "run.json");
  for (const char* key : {"\"config_hash\"", "\"seed\"", "\"fnv1a64\"", "\"checkpoint.bin\"",
                          "\"timestamp\""}) {
    EXPECT_NE(manifest.find(key), std::string::npos) << key;
  }
}

TEST_F(CliPipeline, SummariesForEveryDocument) {
  const fs::path sum = *root_ / "a" / "sum";
  std::ifstream abs(sum / "abstractive.txt");
  std::size_t lines = 0;
  for (std::string line; std::getline(abs, line);) ++lines;
  EXPECT_EQ(lines, 16u);
  const std::string ext = read_file(sum / "extractive.txt");
  std::size_t headers = 0;
  for (std::size_t p = ext.find("# "); p != std::string::npos; p = ext.find("\n# ", p + 1)) ++headers;
  EXPECT_EQ(headers, 16u);
  EXPECT_TRUE(fs::exists(sum / "extractive.jsonl"));
  EXPECT_TRUE(fs::exists(sum / "abstractive.jsonl"));
  EXPECT_TRUE(fs::exists(*root_ / "a" / "rl" / "episodes.tsv"));
  EXPECT_TRUE(fs::exists(*root_ / "a" / "part" / "density_lt0.7.jsonl"));
  EXPECT_TRUE(fs::exists(*root_ / "a" / "graphs" / "density_histogram.csv"));
}

TEST_F(CliPipeline, ErrorsExitNonzero) {
  const std::string d = (*root_ / "err").string();
  const std::string corpus = (*root_ / "a" / "syn" / "corpus.jsonl").string();
  const std::string ck = (*root_ / "a" / "sel" / "checkpoint.bin").string();
  const std::vector<std::vector<std::string>> bad = {
      {},
      {"no-such-command"},
      {"stats", "--corpus", d + "/missing.jsonl", "--out", d},
      {"build-graphs", "--out", d},
      {"partition", "--corpus", corpus, "--density", "~3", "--out", d},
      {"train-selector", "--corpus", corpus, "--ablate", "no_such_ablation", "--out", d},
      {"train-selector", "--corpus", corpus, "--set", "batch_size", "--out", d},
      {"train-selector", "--corpus", corpus, "--set", "node_dim=7", "--out", d},
      {"train-generator", "--corpus", corpus, "--out", d},
      {"train-rl", "--corpus", corpus, "--checkpoint", ck, "--out", d},
      {"train-generator", "--corpus", corpus, "--checkpoint", ck, "--set", "word_dim=9", "--out", d},
      {"summarize", "--corpus", corpus, "--checkpoint", ck, "--mode", "poetry", "--out", d},
      {"evaluate", "--corpus", corpus, "--checkpoint", d + "/none.bin", "--out", d},
      {"gen-synthetic", "--docs", "3", "--sentences", "2", "--entities", "4", "--out", d},
  };
  for (const auto& args : bad) {
    const Result r = invoke(args);
    std::string joined;
    for (const auto& a : args) joined += a + " ";
    EXPECT_NE(r.code, 0) << joined;
    if (!args.empty()) EXPECT_FALSE(r.err.empty()) << joined;
  }
}

}  // namespace
}  // namespace kgsumm::cli
