#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "hdc/cli/commands.hpp"
#include "hdc/cli/run_config.hpp"
#include "hdc/text.hpp"
#include "test_util.hpp"

using namespace hdc;
using namespace hdc::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"hdc"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage) argv.push_back(s.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallConfig = R"(cascade:
  input_dim: 6
  block_layers: [[8], [8], [8]]
  embed_dim: [4, 4, 4]
train:
  iterations: 20
  lr_decay_every: 100
sampler:
  classes_per_batch: 3
  images_per_class: 3
data:
  synth:
    num_classes: 4
    per_class: 12
    dim: 6
    noise_sigma: 0.4
eval:
  recall_at: [1, 2, 4, 8]
)";

fs::path write_config(const fs::path& dir, const std::string& text, const std::string& name = "run.yaml") {
  const auto path = dir / name;
  std::ofstream(path) << text;
  return path;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("synth command") {
  const auto dir = test::scratch_dir("cli_synth");
  const auto a = run_cli({"synth", "--output-dir", (dir / "a").string()});
  REQUIRE(a.code == kSuccess);
  const std::string first = test::slurp(dir / "a" / "synth.csv");
  CHECK(lines_of(first).size() == 500);
  CHECK(a.out.find("10 classes, 500 points") != std::string::npos);

  REQUIRE(run_cli({"synth", "--output-dir", (dir / "b").string()}).code == kSuccess);
  CHECK(test::slurp(dir / "b" / "synth.csv") == first);

  const auto bad = run_cli({"synth", "--out", (dir / "missing" / "deeper" / "x.csv").string()});
  CHECK(bad.code == kIoError);
  CHECK_FALSE(bad.err.empty());

  std::ofstream(dir / "blocker") << "file";
  CHECK(run_cli({"synth", "--output-dir", (dir / "blocker" / "sub").string()}).code == kIoError);
}

TEST_CASE("train, eval, embed and histogram") {
  const auto dir = test::scratch_dir("cli_train");
  const auto cfg = write_config(dir, kSmallConfig);
  const auto out1 = dir / "run1";
  const auto t1 = run_cli({"train", "--config", cfg.string(), "--output-dir", out1.string()});
  REQUIRE(t1.code == kSuccess);

  SUBCASE("log and sizes") {
    const auto log = lines_of(test::slurp(out1 / "train_log.csv"));
    REQUIRE(log.size() == 21);
    CHECK(log[0] == "iteration,lr,total_loss,mean_loss_1,pos_1,neg_1,mean_loss_2,pos_2,neg_2,"
                    "mean_loss_3,pos_3,neg_3");
    for (std::size_t i = 1; i < log.size(); ++i) {
      const auto f = split(log[i], ',');
      REQUIRE(f.size() == 12);
      // 3 classes x 3 rows: 18 positives and 54 negatives, then the ceiling rule
      CHECK(f[4] == "18");
      CHECK(f[5] == "54");
      CHECK(f[7] == "9");
      CHECK(f[8] == "27");
      CHECK(f[10] == "2");
      CHECK(f[11] == "6");
    }
    CHECK(fs::exists(out1 / "model.ckpt"));
    const auto resolved = load_run_config(out1 / "resolved_config.yaml");
    CHECK(resolved.cascade == load_run_config(cfg).cascade);
    CHECK(resolved.output_dir == out1);
  }

  SUBCASE("identical invocations give identical bytes") {
    const auto out2 = dir / "run2";
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--output-dir", out2.string()}).code == kSuccess);
    CHECK(test::slurp(out1 / "model.ckpt") == test::slurp(out2 / "model.ckpt"));
    CHECK(test::slurp(out1 / "train_log.csv") == test::slurp(out2 / "train_log.csv"));
    const auto out3 = dir / "run3";
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--output-dir", out3.string(), "--workers",
                     "3"}).code == kSuccess);
    CHECK(test::slurp(out1 / "model.ckpt") == test::slurp(out3 / "model.ckpt"));
    CHECK(test::slurp(out1 / "train_log.csv") == test::slurp(out3 / "train_log.csv"));
  }

  SUBCASE("plain_contrastive logs one level") {
    const auto out4 = dir / "plain";
    REQUIRE(run_cli({"train", "--config", cfg.string(), "--output-dir", out4.string(), "--mode",
                     "plain_contrastive"}).code == kSuccess);
    const auto log = lines_of(test::slurp(out4 / "train_log.csv"));
    CHECK(log[0] == "iteration,lr,total_loss,mean_loss_3,pos_3,neg_3");
    CHECK(split(log[1], ',')[4] == "18");
  }

  SUBCASE("periodic checkpoints") {
    const auto out5 = dir / "periodic";
    std::string text = std::string(kSmallConfig) + "output_dir: " + out5.string() + "\n";
    text.replace(text.find("iterations: 20"), 14, "iterations: 20\n  checkpoint_every: 8");
    const auto c = write_config(dir, text, "p.yaml");
    REQUIRE(run_cli({"train", "--config", c.string()}).code == kSuccess);
    CHECK(fs::exists(out5 / "model_iter8.ckpt"));
    CHECK(fs::exists(out5 / "model_iter16.ckpt"));
    CHECK_FALSE(fs::exists(out5 / "model_iter20.ckpt"));
  }

  SUBCASE("eval") {
    const auto e1 = run_cli({"eval", "--config", cfg.string(), "--output-dir", out1.string()});
    REQUIRE(e1.code == kSuccess);
    const std::string recall = test::slurp(out1 / "eval_recall.csv");
    const auto rows = lines_of(recall);
    REQUIRE(rows.size() == 5);
    double prev = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const double v = parse_double(split(rows[i], ',')[1]);
      CHECK(v >= prev);
      prev = v;
    }
    const std::string report = test::slurp(out1 / "eval_report.txt");
    REQUIRE(run_cli({"eval", "--config", cfg.string(), "--output-dir", out1.string()}).code == kSuccess);
    CHECK(test::slurp(out1 / "eval_recall.csv") == recall);
    CHECK(test::slurp(out1 / "eval_report.txt") == report);

    const auto e2 = run_cli({"eval", "--config", cfg.string(), "--output-dir", out1.string(),
                             "--recall-at", "1,3", "--level", "2"});
    REQUIRE(e2.code == kSuccess);
    CHECK(lines_of(test::slurp(out1 / "eval_recall_level2.csv")).size() == 3);
    CHECK(fs::exists(out1 / "eval_report_level2.txt"));
    CHECK(lines_of(test::slurp(out1 / "eval_histogram_level2.csv")).size() == 101);

    CHECK(run_cli({"eval", "--config", cfg.string(), "--output-dir", out1.string(), "--level", "4"})
              .code == kUsageError);
    CHECK(run_cli({"eval", "--config", cfg.string(), "--checkpoint", (dir / "none.ckpt").string()})
              .code == kIoError);
    std::ofstream(dir / "junk.ckpt") << "garbage";
    CHECK(run_cli({"eval", "--config", cfg.string(), "--checkpoint", (dir / "junk.ckpt").string()})
              .code == kIoError);
  }

  SUBCASE("eval against data of the wrong width") {
    std::ofstream(dir / "narrow.csv") << "0,1,2\n0,1,3\n1,5,5\n1,5,6\n";
    const auto r = run_cli({"eval", "--config", cfg.string(), "--output-dir", out1.string(), "--data",
                            (dir / "narrow.csv").string()});
    CHECK(r.code == kUsageError);
    CHECK(r.err.find("features") != std::string::npos);
  }

  SUBCASE("embed and histogram") {
    REQUIRE(run_cli({"embed", "--config", cfg.string(), "--output-dir", out1.string()}).code == kSuccess);
    const auto desc = lines_of(test::slurp(out1 / "descriptors.csv"));
    // held-out split: 4 of 12 rows per class
    CHECK(desc.size() == 16);
    CHECK(split(desc[0], ',').size() == 13);
    REQUIRE(run_cli({"embed", "--config", cfg.string(), "--output-dir", out1.string(), "--level", "1"})
                .code == kSuccess);
    CHECK(split(lines_of(test::slurp(out1 / "descriptors_level1.csv"))[0], ',').size() == 5);

    const auto h = run_cli({"histogram", "--config", cfg.string(), "--output-dir", out1.string()});
    REQUIRE(h.code == kSuccess);
    const auto hist = lines_of(test::slurp(out1 / "histogram.csv"));
    CHECK(hist.size() == 101);
    CHECK(hist[0] == "bin_lo,bin_hi,pos_count,pos_fraction,neg_count,neg_fraction");
    CHECK(h.out.find("lda: ") != std::string::npos);
  }
}

TEST_CASE("config and usage errors exit 1") {
  const auto dir = test::scratch_dir("cli_errors");
  CHECK(run_cli({}).code == kUsageError);
  CHECK(run_cli({"frobnicate"}).code == kUsageError);
  CHECK(run_cli({"train", "--no-such-flag"}).code == kUsageError);
  CHECK(run_cli({"train", "--mode", "triplet", "--output-dir", dir.string()}).code == kUsageError);
  CHECK(run_cli({"train", "--rank-by", "sideways", "--output-dir", dir.string()}).code == kUsageError);

  const auto unknown = write_config(dir, "train:\n  iteratons: 5\n", "unknown.yaml");
  const auto r = run_cli({"train", "--config", unknown.string()});
  CHECK(r.code == kUsageError);
  CHECK(r.err.find("iteratons") != std::string::npos);

  const auto invalid = write_config(dir, "cascade:\n  lambda: [1, 1]\n", "invalid.yaml");
  CHECK(run_cli({"train", "--config", invalid.string(), "--output-dir", dir.string()}).code == kUsageError);
  const auto broken = write_config(dir, "cascade: [unclosed\n", "broken.yaml");
  CHECK(run_cli({"train", "--config", broken.string()}).code == kUsageError);
  CHECK(run_cli({"train", "--config", (dir / "absent.yaml").string()}).code == kIoError);
  CHECK(run_cli({"--help"}).code == kSuccess);
}

TEST_CASE("training abort exits 3") {
  const auto dir = test::scratch_dir("cli_abort");
  std::ofstream csv(dir / "huge.csv");
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 4; ++i) {
      csv << c;
      for (int d = 0; d < 64; ++d) csv << ",1.7e308";
      csv << "\n";
    }
  csv.close();
  const auto cfg = write_config(dir, "cascade:\n  input_dim: 64\n  block_layers: [[4]]\n  embed_dim: [2]\n"
                                     "  lambda: [1]\n  hard_fraction: [100]\n"
                                     "sampler:\n  classes_per_batch: 2\n  images_per_class: 2\n"
                                     "data:\n  train_fraction: 1.0\n");
  const auto r = run_cli({"train", "--config", cfg.string(), "--data", (dir / "huge.csv").string(),
                          "--output-dir", (dir / "out").string()});
  CHECK(r.code == kTrainingAborted);
  CHECK(r.err.find("batch rows") != std::string::npos);
  // the log keeps the offending record
  CHECK(lines_of(test::slurp(dir / "out" / "train_log.csv")).size() == 2);
}

TEST_CASE("gradcheck") {
  const auto ok = run_cli({"gradcheck"});
  CHECK(ok.code == kSuccess);
  CHECK(ok.out.find("PASS") != std::string::npos);
  CHECK(run_cli({"gradcheck", "--rank-by", "previous"}).code == kSuccess);

  RunConfig single;
  single.cascade.block_layers = {{64}};
  single.cascade.embed_dim = {16};
  single.cascade.lambda = {1};
  single.cascade.hard_fraction = {100};
  std::ostringstream out;
  CHECK(cmd_gradcheck(single, out) == kSuccess);

  // A sign flip in one backward rule must be caught.
  std::ostringstream flipped;
  const int code = cmd_gradcheck(RunConfig{}, flipped, [](Parameters& g) {
    g.levels[1].head.weight *= -1.0;
  });
  CHECK(code == kGradcheckFailed);
  CHECK(flipped.str().find("FAIL") != std::string::npos);
  CHECK(flipped.str().find("worst_parameter_index") != std::string::npos);
}
