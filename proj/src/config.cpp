#include "pcc/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace pcc {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    parts.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<std::size_t> parse_sizes(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  if (value.empty()) return out;
  for (auto part : split(value, ',')) out.push_back(parse_number<std::size_t>(key, part));
  return out;
}

std::vector<double> parse_doubles(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto part : split(value, ',')) out.push_back(parse_number<double>(key, part));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& values, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

// The per-layer keys of the PointNet++ hierarchy are lists with one entry per
// layer; the layer count follows the longest list given.
void resize_layers(PointNetPPConfig& pp, std::size_t n) {
  if (pp.layers.size() < n) pp.layers.resize(n, pp.layers.empty() ? SetAbstractionConfig{} : pp.layers.back());
  if (pp.layers.size() > n) pp.layers.resize(n);
}

}  // namespace

TrainConfig RunConfig::effective_train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  t.points_per_cloud = points;
  return t;
}

void RunConfig::validate() const {
  if (points == 0) throw ConfigError("points must be at least 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (synth_min_points < kMinObjectPoints || synth_max_points < synth_min_points) {
    throw ConfigError("synth point range must satisfy 8 <= synth_min_points <= synth_max_points");
  }
  if (generator.surface_noise < 0.0 || generator.centroid_jitter < 0.0) {
    throw ConfigError("generator noise and jitter must be non-negative");
  }
  try {
    train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (model == ModelKind::kPointNetPP && !arch.pointnetpp.layers.empty() &&
      arch.pointnetpp.layers.front().num_centers > points) {
    throw ConfigError("first set abstraction layer needs more centers than points per cloud");
  }
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  auto& pp = c.arch.pointnetpp;
  if (key == "model") {
    try {
      c.model = parse_model_kind(value);
    } catch (const std::invalid_argument&) {
      bad_value(key, value);
    }
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "points") {
    c.points = parse_number<std::size_t>(key, value);
  } else if (key == "normalize") {
    c.normalize = parse_bool(key, value);
  } else if (key == "balance") {
    c.balance = parse_bool(key, value);
  } else if (key == "test_fraction") {
    c.test_fraction = parse_number<double>(key, value);
  } else if (key == "min_points") {
    c.min_points = parse_number<std::size_t>(key, value);
  } else if (key == "samples_per_class") {
    c.samples_per_class = parse_number<std::size_t>(key, value);
  } else if (key == "synth_min_points") {
    c.synth_min_points = parse_number<std::size_t>(key, value);
  } else if (key == "synth_max_points") {
    c.synth_max_points = parse_number<std::size_t>(key, value);
  } else if (key == "surface_noise") {
    c.generator.surface_noise = parse_number<double>(key, value);
  } else if (key == "centroid_jitter") {
    c.generator.centroid_jitter = parse_number<double>(key, value);
  } else if (key == "epochs") {
    c.train.epochs = parse_number<std::size_t>(key, value);
  } else if (key == "batch_size") {
    c.train.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "learning_rate") {
    c.train.learning_rate = parse_number<double>(key, value);
  } else if (key == "optimizer") {
    if (value == "adam") {
      c.train.optimizer = OptimizerKind::kAdam;
    } else if (value == "sgd") {
      c.train.optimizer = OptimizerKind::kSgd;
    } else {
      bad_value(key, value);
    }
  } else if (key == "adam_beta1") {
    c.train.adam.beta1 = parse_number<double>(key, value);
  } else if (key == "adam_beta2") {
    c.train.adam.beta2 = parse_number<double>(key, value);
  } else if (key == "adam_epsilon") {
    c.train.adam.epsilon = parse_number<double>(key, value);
  } else if (key == "reg_weight") {
    c.train.reg_weight = parse_number<double>(key, value);
  } else if (key == "tnet_widths") {
    c.arch.pointnet.tnet_widths = parse_sizes(key, value);
  } else if (key == "pointnet_widths") {
    c.arch.pointnet.mlp_widths = parse_sizes(key, value);
  } else if (key == "pointnet_head") {
    c.arch.pointnet.head_widths = parse_sizes(key, value);
  } else if (key == "feature_transform") {
    c.arch.pointnet.feature_transform = parse_bool(key, value);
  } else if (key == "grouping") {
    Grouping g;
    if (value == "radius") {
      g = Grouping::kRadius;
    } else if (value == "knn") {
      g = Grouping::kKnn;
    } else {
      bad_value(key, value);
    }
    for (auto& l : pp.layers) l.grouping = g;
  } else if (key == "sa_centers") {
    const auto v = parse_sizes(key, value);
    resize_layers(pp, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pp.layers[i].num_centers = v[i];
  } else if (key == "sa_radius") {
    const auto v = parse_doubles(key, value);
    resize_layers(pp, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pp.layers[i].radius = v[i];
  } else if (key == "sa_max_neighbors") {
    const auto v = parse_sizes(key, value);
    resize_layers(pp, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pp.layers[i].max_neighbors = v[i];
  } else if (key == "sa_k") {
    const auto v = parse_sizes(key, value);
    resize_layers(pp, v.size());
    for (std::size_t i = 0; i < v.size(); ++i) pp.layers[i].k = v[i];
  } else if (key == "sa_widths") {
    const auto groups = split(value, ';');
    resize_layers(pp, groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) pp.layers[i].mlp_widths = parse_sizes(key, groups[i]);
  } else if (key == "pointnetpp_head") {
    pp.head_widths = parse_sizes(key, value);
  } else if (key == "initial_features") {
    if (value == "positions") {
      pp.initial_features = InitialFeatures::kPositions;
    } else if (value == "ones") {
      pp.initial_features = InitialFeatures::kOnes;
    } else {
      bad_value(key, value);
    }
  } else if (key == "data") {
    c.data = value;
  } else if (key == "out") {
    c.out = value;
  } else if (key == "checkpoint") {
    c.checkpoint = value;
  } else if (key == "report") {
    c.report = value;
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string format_run_config(const RunConfig& c) {
  const auto& pp = c.arch.pointnetpp;
  std::vector<std::size_t> centers, max_nb, ks;
  std::vector<double> radii;
  std::string widths;
  for (std::size_t i = 0; i < pp.layers.size(); ++i) {
    const auto& l = pp.layers[i];
    centers.push_back(l.num_centers);
    radii.push_back(l.radius);
    max_nb.push_back(l.max_neighbors);
    ks.push_back(l.k);
    if (i > 0) widths += ';';
    widths += join(l.mlp_widths);
  }
  const bool knn = !pp.layers.empty() && pp.layers.front().grouping == Grouping::kKnn;

  std::ostringstream os;
  os << "model = " << model_kind_name(c.model) << '\n'
     << "seed = " << c.seed << '\n'
     << "points = " << c.points << '\n'
     << "normalize = " << (c.normalize ? "true" : "false") << '\n'
     << "balance = " << (c.balance ? "true" : "false") << '\n'
     << "test_fraction = " << fmt(c.test_fraction) << '\n'
     << "min_points = " << c.min_points << '\n'
     << "samples_per_class = " << c.samples_per_class << '\n'
     << "synth_min_points = " << c.synth_min_points << '\n'
     << "synth_max_points = " << c.synth_max_points << '\n'
     << "surface_noise = " << fmt(c.generator.surface_noise) << '\n'
     << "centroid_jitter = " << fmt(c.generator.centroid_jitter) << '\n'
     << "epochs = " << c.train.epochs << '\n'
     << "batch_size = " << c.train.batch_size << '\n'
     << "learning_rate = " << fmt(c.train.learning_rate) << '\n'
     << "optimizer = " << (c.train.optimizer == OptimizerKind::kAdam ? "adam" : "sgd") << '\n'
     << "adam_beta1 = " << fmt(c.train.adam.beta1) << '\n'
     << "adam_beta2 = " << fmt(c.train.adam.beta2) << '\n'
     << "adam_epsilon = " << fmt(c.train.adam.epsilon) << '\n'
     << "reg_weight = " << fmt(c.train.reg_weight) << '\n'
     << "tnet_widths = " << join(c.arch.pointnet.tnet_widths) << '\n'
     << "pointnet_widths = " << join(c.arch.pointnet.mlp_widths) << '\n'
     << "pointnet_head = " << join(c.arch.pointnet.head_widths) << '\n'
     << "feature_transform = " << (c.arch.pointnet.feature_transform ? "true" : "false") << '\n'
     << "sa_centers = " << join(centers) << '\n'
     << "sa_radius = " << join(radii) << '\n'
     << "sa_max_neighbors = " << join(max_nb) << '\n'
     << "sa_k = " << join(ks) << '\n'
     << "sa_widths = " << widths << '\n'
     << "grouping = " << (knn ? "knn" : "radius") << '\n'
     << "pointnetpp_head = " << join(pp.head_widths) << '\n'
     << "initial_features = " << (pp.initial_features == InitialFeatures::kOnes ? "ones" : "positions") << '\n'
     << "data = " << c.data << '\n'
     << "out = " << c.out << '\n'
     << "checkpoint = " << c.checkpoint << '\n'
     << "report = " << c.report << '\n';
  return os.str();
}

}  // namespace pcc
