// pcc: synthetic LiDAR object classification with PointNet and PointNet++.
//
//   pcc synth      [--config F] [--seed S] --out DIR
//   pcc preprocess [--config F] [--seed S] [--points N] INPUT --out DIR
//   pcc train      [--config F] [--seed S] [--model M] [--points N] DATA --out CKPT
//   pcc eval       CKPT DATA [--out REPORT]
//   pcc predict    CKPT CLOUD
//
// Failures print one line starting with "pcc: error:" and exit with status 1.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "pcc/commands.hpp"
#include "pcc/config.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> model;
  std::optional<std::size_t> points;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool model_flag) {
  cmd->add_option("--config", f.config, "run config file (key = value)");
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--points", f.points, "target points per cloud");
  if (model_flag) cmd->add_option("--model", f.model, "pointnet or pointnetpp");
  cmd->add_option("--out", f.out, "output path");
}

pcc::RunConfig resolve(const CommonFlags& f) {
  pcc::RunConfig config = f.config.empty() ? pcc::RunConfig{} : pcc::load_run_config(f.config);
  if (f.seed) pcc::apply_setting(config, "seed", std::to_string(*f.seed));
  if (f.model) pcc::apply_setting(config, "model", *f.model);
  if (f.points) pcc::apply_setting(config, "points", std::to_string(*f.points));
  if (!f.out.empty()) config.out = f.out;
  config.validate();
  return config;
}

std::string pick(const std::string& flag, const std::string& fallback, const char* what) {
  const std::string& v = flag.empty() ? fallback : flag;
  if (v.empty()) throw pcc::CommandError(std::string("missing ") + what);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-cloud object classification"};
  app.require_subcommand(1);

  CommonFlags synth_f, prep_f, train_f;
  std::string prep_in, train_data, eval_ckpt, eval_data, eval_out, pred_ckpt, pred_cloud;

  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  add_common(synth, synth_f, false);

  auto* prep = app.add_subcommand("preprocess", "resample and normalize a dataset");
  add_common(prep, prep_f, false);
  prep->add_option("input", prep_in, "manifest or dataset directory");

  auto* trn = app.add_subcommand("train", "train a model and write a checkpoint");
  add_common(trn, train_f, true);
  trn->add_option("data", train_data, "manifest or dataset directory");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("checkpoint", eval_ckpt)->required();
  ev->add_option("data", eval_data)->required();
  ev->add_option("--out", eval_out, "report file (default CHECKPOINT.report.txt)");

  auto* pred = app.add_subcommand("predict", "classify one cloud file");
  pred->add_option("checkpoint", pred_ckpt)->required();
  pred->add_option("cloud", pred_cloud)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "pcc: error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (synth->parsed()) {
      const auto config = resolve(synth_f);
      pcc::cmd_synth(config, pick(config.out, config.data, "output directory (--out)"), std::cerr);
    } else if (prep->parsed()) {
      const auto config = resolve(prep_f);
      pcc::cmd_preprocess(config, pick(prep_in, config.data, "input dataset"),
                          pick(config.out, "", "output directory (--out)"), std::cerr);
    } else if (trn->parsed()) {
      const auto config = resolve(train_f);
      pcc::cmd_train(config, pick(train_data, config.data, "training data"),
                     pick(config.out, config.checkpoint, "checkpoint path (--out)"), std::cerr);
    } else if (ev->parsed()) {
      const std::string report = eval_out.empty() ? eval_ckpt + ".report.txt" : eval_out;
      pcc::cmd_eval(eval_ckpt, eval_data, report, std::cout);
    } else if (pred->parsed()) {
      pcc::cmd_predict(pred_ckpt, pred_cloud, std::cout);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "pcc: error: " << msg << '\n';
    return 1;
  }
  return 0;
}
