// Copyright 2026 The HPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hpl/cli/commands.hpp"
#include "hpl/cli/experiment.hpp"
#include "hpl/dataset.hpp"

namespace hpl::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_with_prefix(const std::string& text, const std::string& prefix) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind(prefix, 0) == 0) out.push_back(line);
  }
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hpl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small two-level instance split into unseen-class halves.
  void make_data() {
    ASSERT_EQ(cli({"generate", "--num-super", "2", "--classes-per-super", "4", "--samples-per-class", "6", "--dim",
                   "6", "--out", path("all.tsv")})
                  .code,
              0);
    ASSERT_EQ(cli({"split", "--data", path("all.tsv"), "--out-train", path("train.tsv"), "--out-test",
                   path("test.tsv")})
                  .code,
              0);
  }
  std::vector<std::string> train_args() const {
    return {"train", "--data", path("train.tsv"), "--eval-data", path("test.tsv"), "--epochs", "3", "--warmup", "1",
            "--batch", "8", "--lr", "1e-3", "--hidden", "8", "--embed-dim", "4"};
  }

  fs::path dir_;
};

TEST_F(CliTest, GenerateDefaultsAndDeterminism) {
  const Result r = cli({"generate", "--out", path("a.tsv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("N=1280\tC=64\tsuper=8"), std::string::npos);
  EXPECT_EQ(slurp(path("a.tsv")).rfind("#coarse:", 0), 0u);
  ASSERT_EQ(cli({"generate", "--out", path("b.tsv")}).code, 0);
  EXPECT_EQ(slurp(path("a.tsv")), slurp(path("b.tsv")));
  ASSERT_EQ(cli({"generate", "--seed", "3", "--out", path("c.tsv")}).code, 0);
  EXPECT_NE(slurp(path("a.tsv")), slurp(path("c.tsv")));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({"generate", "--classes-per-super", "0", "--out", path("x.tsv")}).code, kExitUsage);
  EXPECT_EQ(cli({"generate", "--noise", "5", "--out", path("x.tsv")}).code, kExitUsage);  // noise > class spread
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"generate"}).code, kExitUsage);  // --out required
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  make_data();
  EXPECT_EQ(cli({"train", "--data", path("train.tsv"), "--loss", "triplet"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--data", path("train.tsv"), "--coarse", "99"}).code, kExitUsage);
  EXPECT_EQ(cli({"train", "--data", path("train.tsv"), "--k", "0"}).code, kExitUsage);
  EXPECT_EQ(cli({"eval", "--checkpoint", path("none"), "--query", path("test.tsv")}).code, kExitUsage);
}

TEST_F(CliTest, RuntimeErrors) {
  make_data();
  EXPECT_EQ(cli({"train", "--data", path("missing.tsv")}).code, kExitRuntime);
  EXPECT_EQ(cli({"eval", "--checkpoint", path("missing.ckpt"), "--query", path("test.tsv"), "--same-set"}).code,
            kExitRuntime);

  // --gt-hierarchy on a file without a '#coarse:' header.
  const Dataset plain = [&] {
    Dataset d = load_dataset(path("train.tsv"));
    d.gt_coarse.reset();
    return d;
  }();
  save_dataset(path("plain.tsv"), plain);
  const Result r = cli({"train", "--data", path("plain.tsv"), "--gt-hierarchy", "--out-checkpoint", path("g.ckpt")});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("#coarse"), std::string::npos);
}

TEST_F(CliTest, TrainWritesCheckpointLogAndRecord) {
  make_data();
  auto args = train_args();
  args.insert(args.end(), {"--coarse", "2", "--out-checkpoint", path("m.ckpt"), "--record", path("run.json")});
  const Result r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_with_prefix(r.out, "config\t").size(), 1u);
  EXPECT_EQ(lines_with_prefix(r.out, "epoch\t").size(), 3u);
  EXPECT_EQ(lines_with_prefix(r.out, "metrics\t").size(), 1u);
  EXPECT_TRUE(fs::exists(path("m.ckpt")));
  const std::string log = slurp(path("m.ckpt.log"));
  // header plus 3 epochs x ceil(24/8) iterations
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 1 + 9);
  EXPECT_NE(slurp(path("run.json")).find("\"map_at_r\""), std::string::npos);

  // Identical flags give identical data lines.
  args.back() = path("run2.json");
  const Result again = cli(args);
  EXPECT_EQ(again.out, r.out);
}

TEST_F(CliTest, CoarseZeroAndOmegaZeroMatchSingleLevel) {
  make_data();
  auto run = [&](std::vector<std::string> extra, const std::string& ckpt) {
    auto args = train_args();
    args.insert(args.end(), extra.begin(), extra.end());
    args.insert(args.end(), {"--out-checkpoint", path(ckpt)});
    const Result r = cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return slurp(path(ckpt + ".log"));
  };
  const std::string single = run({}, "a.ckpt");
  EXPECT_EQ(run({"--coarse", "0"}, "b.ckpt"), single);
  // With omega1 = 0 the coarse level adds nothing, so the whole log matches.
  EXPECT_EQ(run({"--coarse", "2", "--omega1", "0"}, "c.ckpt"), single);
}

TEST_F(CliTest, EvalModes) {
  make_data();
  auto args = train_args();
  args.insert(args.end(), {"--out-checkpoint", path("m.ckpt")});
  ASSERT_EQ(cli(args).code, 0);
  const Result same = cli({"eval", "--checkpoint", path("m.ckpt"), "--query", path("test.tsv"), "--same-set"});
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_NE(same.out.find("recall@8="), std::string::npos);
  const Result one =
      cli({"eval", "--checkpoint", path("m.ckpt"), "--query", path("test.tsv"), "--same-set", "--k", "1"});
  const auto line = lines_with_prefix(one.out, "metrics\t");
  ASSERT_EQ(line.size(), 1u);
  EXPECT_NE(line[0].find("recall@1="), std::string::npos);
  EXPECT_EQ(line[0].find("recall@2="), std::string::npos);
  const Result qg = cli({"eval", "--checkpoint", path("m.ckpt"), "--query", path("test.tsv"), "--gallery",
                         path("test.tsv")});
  ASSERT_EQ(qg.code, 0) << qg.err;
  // Each query finds itself first when it is also in the gallery.
  EXPECT_NE(qg.out.find("recall@1=1\t"), std::string::npos);

  // Overfit sanity: evaluating the training data itself.
  const Result tr = cli({"eval", "--checkpoint", path("m.ckpt"), "--query", path("train.tsv"), "--same-set"});
  EXPECT_EQ(tr.code, 0);

  ASSERT_EQ(cli({"generate", "--dim", "3", "--out", path("narrow.tsv")}).code, 0);
  const Result mismatch =
      cli({"eval", "--checkpoint", path("m.ckpt"), "--query", path("narrow.tsv"), "--same-set"});
  EXPECT_EQ(mismatch.code, kExitRuntime);
  EXPECT_NE(mismatch.err.find("features"), std::string::npos);
}

TEST_F(CliTest, SweepTable) {
  make_data();
  std::vector<std::string> args{"sweep", "--data", path("train.tsv"), "--eval-data", path("test.tsv"), "--epochs",
                                "2", "--warmup", "1", "--batch", "8", "--hidden", "8", "--embed-dim", "4",
                                "--coarse", "2", "--param", "omega1", "--values", "0,0.05,0.1,0.2", "--repeats",
                                "2"};
  const Result r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines_with_prefix(r.out, "run\t").size(), 8u);
  const auto rows = lines_with_prefix(r.out, "summary\t");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("summary\t0\t2\t0\t", 0), 0u);
}

TEST_F(CliTest, SweepSingleRunEqualsTrain) {
  make_data();
  const Result sweep = cli({"sweep", "--data", path("train.tsv"), "--eval-data", path("test.tsv"), "--epochs", "2",
                            "--warmup", "1", "--batch", "8", "--hidden", "8", "--embed-dim", "4", "--param",
                            "coarse", "--values", "2", "--seed", "5"});
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  const Result train = cli({"train", "--data", path("train.tsv"), "--eval-data", path("test.tsv"), "--epochs", "2",
                            "--warmup", "1", "--batch", "8", "--hidden", "8", "--embed-dim", "4", "--coarse", "2",
                            "--seed", "5", "--k", "1", "--out-checkpoint", path("t.ckpt")});
  ASSERT_EQ(train.code, 0) << train.err;
  const std::string metrics = lines_with_prefix(train.out, "metrics\t").at(0);
  const std::string run = lines_with_prefix(sweep.out, "run\t").at(0);
  // run<TAB>value<TAB>seed<TAB>r1<TAB>map<TAB>rp<TAB>status
  std::vector<std::string> f;
  std::istringstream in(run);
  for (std::string tok; std::getline(in, tok, '\t');) f.push_back(tok);
  EXPECT_NE(metrics.find("recall@1=" + f[3]), std::string::npos);
  EXPECT_NE(metrics.find("map@r=" + f[4]), std::string::npos);
  EXPECT_NE(metrics.find("rp=" + f[5]), std::string::npos);
}

TEST(MeanCi, NormalApproximation) {
  const auto [m1, c1] = mean_ci95({0.5});
  EXPECT_EQ(m1, 0.5);
  EXPECT_EQ(c1, 0.0);
  const auto [m, c] = mean_ci95({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  // sample sd = sqrt(5/3)
  EXPECT_NEAR(c, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
}

}  // namespace
}  // namespace hpl::cli
