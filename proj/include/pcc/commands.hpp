#pragma once

// Library side of the `pcc` command-line tool. Each command takes a resolved
// RunConfig, writes its artifacts, and reports progress on `log`.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pcc/checkpoint.hpp"
#include "pcc/config.hpp"
#include "pcc/dataset.hpp"
#include "pcc/metrics.hpp"

namespace pcc {

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedCloud {
  std::string name;  // manifest entry
  LabeledCloud sample;
};

// Accepts a manifest file or a directory holding manifest.txt.
std::filesystem::path resolve_manifest(const std::filesystem::path& data);
std::vector<NamedCloud> load_dataset(const std::filesystem::path& data);

// Canonical order, resample to config.points, then (optionally) normalize.
PointCloud prepare_cloud(const PointCloud& cloud, const RunConfig& config, std::uint64_t seed);

struct SynthSummary {
  std::size_t files = 0;
  std::filesystem::path manifest;
};
SynthSummary cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

struct PreprocessSummary {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::array<std::size_t, 4> class_counts{};
  bool split_written = false;
};
PreprocessSummary cmd_preprocess(const RunConfig& config, const std::filesystem::path& input,
                                 const std::filesystem::path& out_dir, std::ostream& log);

struct TrainSummary {
  std::optional<Model> model;
  std::vector<EpochStats> history;
  std::filesystem::path checkpoint;
  std::filesystem::path history_file;
};
// History lines `epoch,loss,train_acc` are appended as epochs finish, so a
// diverged run keeps the epochs it completed.
TrainSummary cmd_train(const RunConfig& config, const std::filesystem::path& data,
                       const std::filesystem::path& checkpoint, std::ostream& log);

std::filesystem::path history_path(const std::filesystem::path& checkpoint);

// Evaluates with the checkpoint's own preprocessing settings; prints the
// report to `out` and writes it to report_path.
MetricsReport cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data,
                       const std::filesystem::path& report_path, std::ostream& out);

// Prints `<class> p0 p1 p2 p3` and returns that line.
std::string cmd_predict(const std::filesystem::path& checkpoint, const std::filesystem::path& cloud_file,
                        std::ostream& out);

// Evaluation of an in-memory model on a dataset, with the same preprocessing
// cmd_eval applies.
MetricsReport evaluate_dataset(const Model& model, const RunConfig& config, const std::vector<NamedCloud>& data);

}  // namespace pcc
