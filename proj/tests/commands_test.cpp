#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pcc/commands.hpp"

namespace pcc {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("pcc_commands_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

RunConfig small_run(std::size_t per_class) {
  return parse_run_config(
      "samples_per_class = " + std::to_string(per_class) +
      "\n"
      "points = 64\n"
      "synth_min_points = 40\n"
      "synth_max_points = 120\n"
      "tnet_widths = 8,16\n"
      "pointnet_widths = 16,32\n"
      "pointnet_head = 16\n"
      "sa_centers = 16,4\n"
      "sa_widths = 16,16;16,32\n"
      "pointnetpp_head = 16\n"
      "epochs = 1\n");
}

TEST(Synth, CountsDeterminismAndParsability) {
  const auto a = fresh_dir("synth_a"), b = fresh_dir("synth_b");
  std::ostringstream log;
  const auto cfg = small_run(10);
  const auto s = cmd_synth(cfg, a, log);
  cmd_synth(cfg, b, log);
  EXPECT_EQ(s.files, 40u);
  EXPECT_EQ(count_lines(read_file(a / "manifest.txt")), 40u);
  std::size_t files = 0;
  for (const auto& path : read_manifest(a / "manifest.txt")) {
    ++files;
    const auto f = load_cloud_file(path);
    EXPECT_TRUE(f.label.has_value());
    EXPECT_GE(f.cloud.size(), 40u);
    EXPECT_LE(f.cloud.size(), 120u);
    EXPECT_EQ(read_file(path), read_file(b / path.filename()));
  }
  EXPECT_EQ(files, 40u);
}

TEST(Synth, UnwritableDestinationFails) {
  const auto dir = fresh_dir("synth_bad");
  std::ofstream(dir / "blocker") << "x";
  std::ostringstream log;
  EXPECT_THROW(cmd_synth(small_run(1), dir / "blocker" / "sub", log), CommandError);
}

TEST(Preprocess, ExactSizesAndIdempotence) {
  const auto raw = fresh_dir("pre_raw"), out = fresh_dir("pre_out"), again = fresh_dir("pre_again");
  std::ostringstream log;
  auto cfg = small_run(5);
  cmd_synth(cfg, raw, log);
  const auto s = cmd_preprocess(cfg, raw, out, log);
  EXPECT_EQ(s.written, 20u);
  EXPECT_TRUE(s.split_written);
  EXPECT_NE(log.str().find("class balance: car=5 truck=5 person=5 bicycle=5"), std::string::npos) << log.str();
  for (const auto& p : read_manifest(out / "manifest.txt")) EXPECT_EQ(load_cloud(p).size(), 64u);
  EXPECT_EQ(count_lines(read_file(out / "train.txt")) + count_lines(read_file(out / "test.txt")), 20u);
  cmd_preprocess(cfg, out / "manifest.txt", again, log);
  for (const auto& p : read_manifest(again / "manifest.txt")) EXPECT_EQ(load_cloud(p).size(), 64u);
}

TEST(Preprocess, CorruptFileSkippedWithWarning) {
  const auto raw = fresh_dir("corrupt_raw"), out = fresh_dir("corrupt_out");
  std::vector<std::string> entries;
  for (int i = 0; i < 10; ++i) {
    const std::string name = "c" + std::to_string(i) + ".txt";
    if (i == 4) {
      std::ofstream(raw / name) << "# label 0\n1.0 2.0\n";
    } else {
      save_cloud(generate_object(i % 4, i, 50).cloud, raw / name, i % 4);
    }
    entries.push_back(name);
  }
  write_manifest(raw / "manifest.txt", entries);
  auto cfg = small_run(1);
  cfg.balance = false;
  std::ostringstream log;
  const auto s = cmd_preprocess(cfg, raw, out, log);
  EXPECT_EQ(s.written, 9u);
  EXPECT_EQ(s.skipped, 1u);
  EXPECT_EQ(count_lines(read_file(out / "manifest.txt")), 9u);
  const std::string text = log.str();
  std::size_t warnings = 0;
  for (std::size_t pos = 0; (pos = text.find("warning: skipping", pos)) != std::string::npos; ++pos) ++warnings;
  EXPECT_EQ(warnings, 1u);
  EXPECT_NE(text.find("c4.txt:2:"), std::string::npos) << text;
}

TEST(Preprocess, AllSkippedFails) {
  const auto raw = fresh_dir("allbad_raw");
  std::ofstream(raw / "a.txt") << "garbage\n";
  write_manifest(raw / "manifest.txt", {"a.txt"});
  std::ostringstream log;
  EXPECT_THROW(cmd_preprocess(small_run(1), raw, fresh_dir("allbad_out"), log), CommandError);
  EXPECT_THROW(cmd_preprocess(small_run(1), fresh_dir("missing") / "nope", fresh_dir("allbad_out2"), log),
               std::runtime_error);
}

class TrainEvalTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fresh_dir("train_eval");
    std::ostringstream log;
    cmd_synth(small_run(4), root_ / "raw", log);
    cmd_preprocess(small_run(4), root_ / "raw", root_ / "proc", log);
  }
  static fs::path root_;
};
fs::path TrainEvalTest::root_;

TEST_F(TrainEvalTest, OneEpochHistoryAndCheckpointRoundTrip) {
  std::ostringstream log;
  const auto cfg = small_run(4);
  const auto ckpt = root_ / "pn.ckpt";
  const auto s = cmd_train(cfg, root_ / "proc", ckpt, log);
  const auto history = read_file(history_path(ckpt));
  EXPECT_EQ(count_lines(history), 1u);
  EXPECT_EQ(history.rfind("1,", 0), 0u);

  const auto data = load_dataset(root_ / "proc");
  const auto from_disk = load_checkpoint(ckpt);
  EXPECT_EQ(format_report(evaluate_dataset(*s.model, cfg, data)),
            format_report(evaluate_dataset(from_disk.model, from_disk.config, data)));

  std::ostringstream out1, out2;
  cmd_eval(ckpt, root_ / "proc", root_ / "r1.txt", out1);
  cmd_eval(ckpt, root_ / "proc", root_ / "r2.txt", out2);
  EXPECT_EQ(out1.str(), out2.str());
  EXPECT_EQ(read_file(root_ / "r1.txt"), out1.str());
  for (const char* key : {"accuracy=", "sensitivity=", "specificity=", "precision=", "false_positive_rate=", "f1=",
                          "auc="}) {
    EXPECT_NE(out1.str().find(key), std::string::npos) << key;
  }
  EXPECT_EQ(count_lines(out1.str()), 11u);
}

TEST_F(TrainEvalTest, PointNetPPRecordedInCheckpoint) {
  auto cfg = small_run(4);
  cfg.model = ModelKind::kPointNetPP;
  std::ostringstream log;
  const auto ckpt = root_ / "pp.ckpt";
  cmd_train(cfg, root_ / "proc", ckpt, log);
  EXPECT_EQ(load_checkpoint(ckpt).model.kind(), ModelKind::kPointNetPP);
  EXPECT_EQ(load_checkpoint(ckpt).config.model, ModelKind::kPointNetPP);
}

TEST_F(TrainEvalTest, OverfitRunScoresPerfectlyOnItsTrainingSet) {
  auto cfg = small_run(4);
  cfg.train.epochs = 60;
  cfg.train.learning_rate = 0.01;
  std::ostringstream log;
  const auto ckpt = root_ / "overfit.ckpt";
  cmd_train(cfg, root_ / "proc" / "train.txt", ckpt, log);
  std::ostringstream out;
  cmd_eval(ckpt, root_ / "proc" / "train.txt", root_ / "overfit.txt", out);
  EXPECT_EQ(out.str().rfind("accuracy=1.000000\n", 0), 0u) << out.str();
}

TEST_F(TrainEvalTest, DivergenceKeepsPartialHistory) {
  auto cfg = small_run(4);
  cfg.train.epochs = 6;
  cfg.train.optimizer = OptimizerKind::kSgd;
  cfg.train.learning_rate = 1e200;
  std::ostringstream log;
  const auto ckpt = root_ / "diverged.ckpt";
  EXPECT_THROW(cmd_train(cfg, root_ / "proc", ckpt, log), TrainingDiverged);
  EXPECT_TRUE(fs::exists(history_path(ckpt)));
  EXPECT_FALSE(fs::exists(ckpt));
}

TEST_F(TrainEvalTest, PredictLineIsConsistentAndPermutationInvariant) {
  std::ostringstream log;
  const auto cfg = small_run(4);
  const auto ckpt = root_ / "predict.ckpt";
  cmd_train(cfg, root_ / "proc", ckpt, log);

  const auto raw = read_manifest(root_ / "raw" / "manifest.txt");
  auto cloud = load_cloud_file(raw[3]);
  std::ostringstream out;
  const auto line = cmd_predict(ckpt, raw[3], out);
  std::istringstream in(line);
  std::string name;
  std::vector<double> p(4);
  in >> name >> p[0] >> p[1] >> p[2] >> p[3];
  EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-6);
  EXPECT_EQ(name, class_name(static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin())));

  std::mt19937_64 rng(4);
  std::shuffle(cloud.cloud.begin(), cloud.cloud.end(), rng);
  save_cloud(cloud.cloud, root_ / "shuffled.txt");
  std::ostringstream out2;
  EXPECT_EQ(cmd_predict(ckpt, root_ / "shuffled.txt", out2), line);
}

TEST_F(TrainEvalTest, PredictRejectsTooSmallCloud) {
  auto cfg = small_run(4);
  cfg.model = ModelKind::kPointNetPP;
  cfg.points = 16;
  cfg.arch.pointnetpp.layers[0].num_centers = 16;
  std::ostringstream log;
  const auto ckpt = root_ / "pp_small.ckpt";
  cmd_train(cfg, root_ / "proc", ckpt, log);
  // Shrink the stored target below the first layer's center count.
  auto c = load_checkpoint(ckpt);
  c.config.points = 8;
  save_checkpoint(root_ / "pp_tiny.ckpt", c.model, c.config);
  std::ostringstream out;
  EXPECT_THROW(cmd_predict(root_ / "pp_tiny.ckpt", read_manifest(root_ / "raw" / "manifest.txt")[0], out), CommandError);
}

}  // namespace
}  // namespace pcc
