#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "hybridtok/bpe.hpp"
#include "hybridtok/vocab.hpp"
#include "support/bpe_oracle.hpp"
#include "support/cli_runner.hpp"
#include "support/generators.hpp"

using namespace hybridtok;
using hybridtok::testing::run_cli;
using hybridtok::testing::slurp;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = hybridtok::testing::fresh_dir("hybridtok_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& content) const {
    std::ofstream(dir_ / name, std::ios::binary) << content;
    return path(name);
  }

  // A FASTA corpus with a couple of records and an N gap.
  std::string corpus(std::size_t len = 4000) const {
    Rng rng(5);
    return write("corpus.fa", ">chr1 test\n" + hybridtok::testing::structured_dna(rng, len) + "NN" +
                                  hybridtok::testing::structured_dna(rng, len / 2) + "\n>chr2\n" +
                                  hybridtok::testing::random_dna(rng, len) + "\n");
  }

  hybridtok::testing::CliResult run(const std::string& args) const { return run_cli(args, dir_); }

  void train_and_build(const std::string& input, std::size_t cycles = 100) const {
    ASSERT_EQ(run("train-bpe --input " + input + " --cycles " + std::to_string(cycles) + " --out " + path("merges.json")).code, 0);
    ASSERT_EQ(run("build-vocab --merges " + path("merges.json") + " --k 6 --out " + path("vocab.json")).code, 0);
  }

  fs::path dir_;
};

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, TrainBpeTinyFastaMatchesOracle) {
  const auto in = write("tiny.fa", ">t\nACGTTGCA\n");
  const auto r = run("train-bpe --input " + in + " --cycles 2 --segment-length 0 --out " + path("m.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = MergeTable::parse(slurp(path("m.json")));
  EXPECT_EQ(table.rules.size(), 2u);
  EXPECT_EQ(table.rules, hybridtok::testing::bpe_oracle_train(std::vector<std::string>{"ACGTTGCA"}, 2).rules);
}

TEST_F(Cli, TrainBpeZeroCycles) {
  const auto r = run("train-bpe --input " + corpus() + " --cycles 0 --out " + path("m.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(MergeTable::parse(slurp(path("m.json"))).rules.empty());
}

TEST_F(Cli, MissingInputIsADataError) {
  const auto r = run("train-bpe --input " + path("nope.fa") + " --cycles 2 --out " + path("m.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not found"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("m.json")));

  const auto j = run("train-bpe --json-errors --input " + path("nope.fa") + " --out " + path("m.json"));
  EXPECT_EQ(j.code, 2);
  const auto diag = nlohmann::json::parse(j.err);
  EXPECT_EQ(diag["kind"], "MalformedFile");
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("train-bpe --cycles 2").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST_F(Cli, BuildVocabEmptyMergesK1AndDeterminism) {
  const MergeTable empty;
  write("empty.json", empty.serialize());
  ASSERT_EQ(run("build-vocab --merges " + path("empty.json") + " --k 1 --out " + path("v.json")).code, 0);
  const auto v = Vocabulary::parse(slurp(path("v.json")));
  EXPECT_EQ(v.size(), 9u);
  EXPECT_EQ(slurp(path("v.txt")), v.to_text());
  const std::string first = slurp(path("v.json"));
  ASSERT_EQ(run("build-vocab --merges " + path("empty.json") + " --k 1 --out " + path("v.json")).code, 0);
  EXPECT_EQ(slurp(path("v.json")), first);
}

TEST_F(Cli, TokenizeBareAndWithSpecials) {
  const auto in = corpus();
  train_and_build(in);
  ASSERT_EQ(run("tokenize --vocab " + path("vocab.json") + " --merges " + path("merges.json") +
                " --input " + in + " --out " + path("t.jsonl")).code, 0);
  ASSERT_EQ(run("tokenize --bare --vocab " + path("vocab.json") + " --merges " + path("merges.json") +
                " --input " + in + " --out " + path("b.jsonl")).code, 0);
  const std::string with = slurp(path("t.jsonl"));
  const std::string bare = slurp(path("b.jsonl"));
  ASSERT_EQ(lines(with), lines(bare));
  const auto w0 = nlohmann::json::parse(with.substr(0, with.find('\n')));
  const auto b0 = nlohmann::json::parse(bare.substr(0, bare.find('\n')));
  EXPECT_EQ(w0["ids"].size(), b0["ids"].size() + 3);
  EXPECT_EQ(b0["kmer_region"], (nlohmann::json{0, 300}));
  EXPECT_EQ(w0["source_id"], "chr1");
}

TEST_F(Cli, EmitMlmNeedsSeedAndIsReproducible) {
  const auto in = corpus();
  train_and_build(in);
  const std::string base = "emit-mlm --vocab " + path("vocab.json") + " --merges " + path("merges.json") +
                           " --input " + in + " --out ";
  EXPECT_EQ(run(base + path("m.jsonl")).code, 1);
  ASSERT_EQ(run(base + path("m1.jsonl") + " --seed 3").code, 0);
  ASSERT_EQ(run(base + path("m2.jsonl") + " --seed 3 --threads 4").code, 0);
  EXPECT_EQ(slurp(path("m1.jsonl")), slurp(path("m2.jsonl")));
  const auto first = nlohmann::json::parse(slurp(path("m1.jsonl")).substr(0, slurp(path("m1.jsonl")).find('\n')));
  for (const char* key : {"input_ids", "target_ids", "mask_positions", "source_id", "offset"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
}

TEST_F(Cli, EmitNextKmerTenWindows) {
  Rng rng(9);
  const auto in = write("w.fa", ">chr21\n" + hybridtok::testing::random_dna(rng, 519) + "\n");
  train_and_build(corpus(), 300);
  const auto r = run("emit-nextkmer --vocab " + path("vocab.json") + " --merges " + path("merges.json") +
                     " --input " + in + " --k 3 --count 10 --seed 1 --out-dir " + path("nk"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(slurp(path("nk/train.jsonl"))), 8u);
  EXPECT_EQ(lines(slurp(path("nk/test.jsonl"))), 2u);
  const auto manifest = nlohmann::json::parse(slurp(path("nk/manifest.json")));
  EXPECT_EQ(manifest["k"], 3);
  EXPECT_EQ(manifest["counts"]["train"], 8);
  EXPECT_EQ(manifest["vocab_digest"], file_digest(path("vocab.json")));
  EXPECT_EQ(manifest["split_seed"], 1);

  const auto short_run = run("emit-nextkmer --vocab " + path("vocab.json") + " --merges " + path("merges.json") +
                             " --input " + in + " --count 50 --seed 1 --out-dir " + path("nk2"));
  EXPECT_EQ(short_run.code, 0);
  EXPECT_NE(short_run.err.find("fewer windows"), std::string::npos);
}

TEST_F(Cli, StatsThreeSchemes) {
  const auto in = corpus();
  train_and_build(in);
  const auto r = run("stats --input " + in + " --merges " + path("merges.json") +
                     " --schemes kmer6,bpe,hybrid --markdown " + path("s.md"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), 4u);
  EXPECT_EQ(r.out.rfind("scheme,", 0), 0u);
  EXPECT_EQ(lines(slurp(path("s.md"))), 5u);
  EXPECT_EQ(run("stats --input " + in + " --schemes bpe").code, 1);
}

TEST_F(Cli, ManifestRecordsHyperparametersAndDigests) {
  const auto in = corpus();
  train_and_build(in);
  const auto r = run("manifest --vocab " + path("vocab.json") + " --merges " + path("merges.json") +
                     " --seed 5 --out " + path("manifest.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(slurp(path("manifest.json")));
  EXPECT_DOUBLE_EQ(m["hyperparameters"]["learning_rate"].get<double>(), 4e-4);
  EXPECT_EQ(m["hyperparameters"]["warmup_steps"], 1000);
  EXPECT_EQ(m["merge_digest"], file_digest(path("merges.json")));
  EXPECT_EQ(m["parameters"]["--seed"], "5");
}
