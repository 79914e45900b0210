#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "pcc/dataset.hpp"
#include "pcc/model.hpp"
#include "pcc/train.hpp"

namespace pcc {

// Everything one batch run needs. Serialized as flat `key = value` text with
// `#` comments; the same text is embedded in checkpoints.
struct RunConfig {
  ModelKind model = ModelKind::kPointNet;
  std::uint64_t seed = 0;
  std::size_t points = 256;  // fixed cloud size after preprocessing
  bool normalize = true;
  bool balance = true;
  double test_fraction = 0.2;
  std::size_t min_points = 1;  // raw clouds smaller than this are rejected

  // synthetic data
  std::size_t samples_per_class = 200;
  std::size_t synth_min_points = 128;
  std::size_t synth_max_points = 512;
  GeneratorOptions generator;

  TrainConfig train;
  ArchitectureConfig arch;

  std::string data;
  std::string out;
  std::string checkpoint;
  std::string report;

  // TrainConfig with the run seed and target size filled in.
  TrainConfig effective_train_config() const;
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Applies key/value pairs onto `config`; unknown keys and bad values throw.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);
RunConfig parse_run_config(std::string_view text, RunConfig base = {});
RunConfig load_run_config(const std::string& path);
std::string format_run_config(const RunConfig& config);

}  // namespace pcc
