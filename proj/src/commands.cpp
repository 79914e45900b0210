#include "pcc/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>

#include "pcc/rng.hpp"
#include "pcc/train.hpp"

namespace fs = std::filesystem;

namespace pcc {
namespace {

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw CommandError("cannot create directory " + dir.string());
}

std::string counts_line(const std::array<std::size_t, 4>& counts) {
  std::string s;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c > 0) s += ' ';
    s += std::string(kClassNames[c]) + "=" + std::to_string(counts[c]);
  }
  return s;
}

std::vector<LabeledCloud> prepared_samples(const std::vector<NamedCloud>& data, const RunConfig& config,
                                           std::string_view stage) {
  std::vector<LabeledCloud> out;
  out.reserve(data.size());
  for (const auto& d : data) {
    const auto seed = fork_seed(config.seed, std::string(stage) + "/" + d.name);
    out.push_back({prepare_cloud(d.sample.cloud, config, seed), d.sample.label});
  }
  return out;
}

}  // namespace

fs::path resolve_manifest(const fs::path& data) {
  if (data.empty()) throw CommandError("no data path given");
  if (fs::is_directory(data)) return data / "manifest.txt";
  return data;
}

std::vector<NamedCloud> load_dataset(const fs::path& data) {
  const fs::path manifest = resolve_manifest(data);
  std::vector<NamedCloud> out;
  for (const auto& path : read_manifest(manifest)) {
    CloudFile file = load_cloud_file(path);
    if (!file.label) throw CommandError(path.string() + ": missing '# label' header");
    out.push_back({fs::relative(path, manifest.parent_path()).generic_string(), {std::move(file.cloud), *file.label}});
  }
  if (out.empty()) throw CommandError("dataset " + manifest.string() + " is empty");
  return out;
}

PointCloud prepare_cloud(const PointCloud& cloud, const RunConfig& config, std::uint64_t seed) {
  if (cloud.size() < std::max<std::size_t>(1, config.min_points)) {
    throw CommandError("cloud has " + std::to_string(cloud.size()) + " points, minimum is " +
                       std::to_string(std::max<std::size_t>(1, config.min_points)));
  }
  PointCloud out = resample_to_fixed_size(canonical_order(cloud), config.points, seed);
  return config.normalize ? normalize_unit_sphere(out) : out;
}

SynthSummary cmd_synth(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  ensure_directory(out_dir);
  Rng sizes(fork_seed(config.seed, "synth/sizes"));
  std::uniform_int_distribution<std::size_t> size_dist(config.synth_min_points, config.synth_max_points);
  std::vector<std::string> entries;
  for (int label = 0; label < static_cast<int>(kClassNames.size()); ++label) {
    for (std::size_t i = 0; i < config.samples_per_class; ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04zu.txt", std::string(kClassNames[static_cast<std::size_t>(label)]).c_str(), i);
      const std::uint64_t seed = fork_seed(config.seed, std::string("synth/") + name);
      const auto sample = generate_object(label, seed, size_dist(sizes), config.generator);
      try {
        save_cloud(sample.cloud, out_dir / name, sample.label);
      } catch (const std::runtime_error& e) {
        throw CommandError(e.what());
      }
      entries.emplace_back(name);
    }
  }
  const fs::path manifest = out_dir / "manifest.txt";
  write_manifest(manifest, entries);
  log << "synth: wrote " << entries.size() << " clouds to " << out_dir.string() << '\n';
  return {entries.size(), manifest};
}

PreprocessSummary cmd_preprocess(const RunConfig& config, const fs::path& input, const fs::path& out_dir,
                                 std::ostream& log) {
  config.validate();
  const fs::path manifest = resolve_manifest(input);
  PreprocessSummary summary;
  std::vector<NamedCloud> loaded;
  for (const auto& path : read_manifest(manifest)) {
    const std::string name = fs::relative(path, manifest.parent_path()).generic_string();
    try {
      CloudFile file = load_cloud_file(path);
      if (!file.label) throw CommandError(path.string() + ": missing '# label' header");
      if (file.cloud.size() < std::max<std::size_t>(1, config.min_points)) {
        throw CommandError(path.string() + ": " + std::to_string(file.cloud.size()) + " points is below min_points");
      }
      loaded.push_back({name, {std::move(file.cloud), *file.label}});
    } catch (const std::exception& e) {
      log << "warning: skipping " << e.what() << '\n';
      ++summary.skipped;
    }
  }
  if (loaded.empty()) throw CommandError("preprocess: every input file was skipped");

  std::vector<NamedCloud> work = loaded;
  if (config.balance) {
    std::vector<LabeledCloud> samples;
    for (const auto& n : loaded) samples.push_back(n.sample);
    const auto balanced = balance_classes(samples, fork_seed(config.seed, "preprocess/balance"));
    std::vector<std::size_t> dup_count(loaded.size(), 0);
    // balance_classes appends duplicates after the originals; name them after
    // their source. Clouds match by identity of contents.
    for (std::size_t i = loaded.size(); i < balanced.size(); ++i) {
      std::size_t src = 0;
      while (src < loaded.size() && (loaded[src].sample.label != balanced[i].label ||
                                     loaded[src].sample.cloud != balanced[i].cloud)) {
        ++src;
      }
      const fs::path base(loaded[src].name);
      const std::string name = (base.parent_path() / (base.stem().string() + "_dup" +
                                                      std::to_string(++dup_count[src]) + base.extension().string()))
                                   .generic_string();
      work.push_back({name, balanced[i]});
    }
  }

  ensure_directory(out_dir);
  std::vector<std::string> entries;
  std::vector<LabeledCloud> processed;
  for (const auto& n : work) {
    const auto seed = fork_seed(config.seed, "preprocess/" + n.name);
    LabeledCloud sample{prepare_cloud(n.sample.cloud, config, seed), n.sample.label};
    const fs::path dst = out_dir / n.name;
    ensure_directory(dst.parent_path());
    save_cloud(sample.cloud, dst, sample.label);
    entries.push_back(n.name);
    processed.push_back(std::move(sample));
  }
  write_manifest(out_dir / "manifest.txt", entries);
  summary.written = entries.size();
  summary.class_counts = class_counts(processed);

  try {
    const auto split = train_test_split(processed, config.test_fraction, fork_seed(config.seed, "preprocess/split"));
    std::vector<std::string> train_entries, test_entries;
    for (std::size_t i : split.train_indices) train_entries.push_back(entries[i]);
    for (std::size_t i : split.test_indices) test_entries.push_back(entries[i]);
    write_manifest(out_dir / "train.txt", train_entries);
    write_manifest(out_dir / "test.txt", test_entries);
    summary.split_written = true;
  } catch (const std::invalid_argument& e) {
    log << "warning: no train/test split written: " << e.what() << '\n';
  }

  log << "preprocess: wrote " << summary.written << " clouds of " << config.points << " points, skipped "
      << summary.skipped << '\n';
  log << "class balance: " << counts_line(summary.class_counts) << '\n';
  return summary;
}

fs::path history_path(const fs::path& checkpoint) { return fs::path(checkpoint.string() + ".history.csv"); }

TrainSummary cmd_train(const RunConfig& config, const fs::path& data, const fs::path& checkpoint, std::ostream& log) {
  config.validate();
  if (checkpoint.empty()) throw CommandError("train: no checkpoint path given");
  const auto dataset = load_dataset(data);
  const auto samples = prepared_samples(dataset, config, "train");

  TrainSummary summary;
  summary.checkpoint = checkpoint;
  summary.history_file = history_path(checkpoint);
  std::ofstream history(summary.history_file, std::ios::binary | std::ios::trunc);
  if (!history) throw CommandError("cannot write " + summary.history_file.string());

  auto on_epoch = [&](const EpochStats& s) {
    char line[128];
    std::snprintf(line, sizeof(line), "%zu,%.9f,%.6f\n", s.epoch, s.loss, s.train_accuracy);
    history << line << std::flush;
    log << "epoch " << s.epoch << " loss " << s.loss << " train_acc " << s.train_accuracy << '\n';
  };
  auto result = train(config.model, samples, config.effective_train_config(), config.arch, on_epoch);
  summary.history = result.history;
  save_checkpoint(checkpoint, result.model, config);
  summary.model = std::move(result.model);
  log << "train: wrote " << checkpoint.string() << '\n';
  return summary;
}

MetricsReport evaluate_dataset(const Model& model, const RunConfig& config, const std::vector<NamedCloud>& data) {
  return evaluate(model, prepared_samples(data, config, "eval"));
}

MetricsReport cmd_eval(const fs::path& checkpoint, const fs::path& data, const fs::path& report_path, std::ostream& out) {
  const auto ckpt = load_checkpoint(checkpoint);
  const auto report = evaluate_dataset(ckpt.model, ckpt.config, load_dataset(data));
  const std::string text = format_report(report);
  out << text;
  std::ofstream file(report_path, std::ios::binary | std::ios::trunc);
  if (!file) throw CommandError("cannot write report " + report_path.string());
  file << text;
  return report;
}

std::string cmd_predict(const fs::path& checkpoint, const fs::path& cloud_file, std::ostream& out) {
  const auto ckpt = load_checkpoint(checkpoint);
  const CloudFile file = load_cloud_file(cloud_file);
  const PointCloud cloud = prepare_cloud(file.cloud, ckpt.config, fork_seed(ckpt.config.seed, "predict"));
  if (cloud.size() < ckpt.model.min_points()) {
    throw CommandError("cloud has " + std::to_string(cloud.size()) + " points after resampling, model needs " +
                       std::to_string(ckpt.model.min_points()));
  }
  const auto preds = predict(ckpt.model, {cloud});
  std::string line(class_name(preds.classes[0]));
  for (double p : preds.probabilities) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %.9f", p);
    line += buf;
  }
  out << line << '\n';
  return line;
}

}  // namespace pcc
