#include "pcc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "pcc/rng.hpp"

namespace fs = std::filesystem;

namespace pcc {
namespace {

// A piece of an object's surface with its measure (area or length) and a
// sampler taking two uniform variates.
struct Patch {
  double measure;
  std::function<Point3(double, double)> sample;
};

std::vector<Patch> box_patches(double l, double w, double h) {
  const double hl = l / 2, hw = w / 2;
  return {
      {l * w, [=](double u, double v) { return Point3{(u - 0.5) * l, (v - 0.5) * w, 0.0}; }},
      {l * w, [=](double u, double v) { return Point3{(u - 0.5) * l, (v - 0.5) * w, h}; }},
      {l * h, [=](double u, double v) { return Point3{(u - 0.5) * l, -hw, v * h}; }},
      {l * h, [=](double u, double v) { return Point3{(u - 0.5) * l, hw, v * h}; }},
      {w * h, [=](double u, double v) { return Point3{-hl, (u - 0.5) * w, v * h}; }},
      {w * h, [=](double u, double v) { return Point3{hl, (u - 0.5) * w, v * h}; }},
  };
}

std::vector<Patch> cylinder_patches(double r, double h) {
  constexpr double kTau = 2.0 * std::numbers::pi;
  auto disk = [r](double z) {
    return [r, z](double u, double v) {
      const double rho = r * std::sqrt(u);
      return Point3{rho * std::cos(kTau * v), rho * std::sin(kTau * v), z};
    };
  };
  return {
      {kTau * r * h, [=](double u, double v) { return Point3{r * std::cos(kTau * u), r * std::sin(kTau * u), v * h}; }},
      {std::numbers::pi * r * r, disk(0.0)},
      {std::numbers::pi * r * r, disk(h)},
  };
}

std::vector<Patch> bicycle_patches() {
  constexpr double kTau = 2.0 * std::numbers::pi;
  constexpr double r = 0.35, half = 0.5;
  auto wheel = [](double cx) {
    return [cx](double u, double) { return Point3{cx + r * std::cos(kTau * u), 0.0, r + r * std::sin(kTau * u)}; };
  };
  return {
      {kTau * r, wheel(-half)},
      {kTau * r, wheel(half)},
      {2.0 * half, [](double u, double) { return Point3{(u - 0.5) * 2.0 * half, 0.0, r}; }},
  };
}

std::vector<Patch> patches_for(int label) {
  switch (static_cast<ObjectClass>(label)) {
    case ObjectClass::kCar: return box_patches(4.5, 1.8, 1.5);
    case ObjectClass::kTruck: return box_patches(8.0, 2.5, 3.0);
    case ObjectClass::kPerson: return cylinder_patches(0.3, 1.7);
    case ObjectClass::kBicycle: return bicycle_patches();
  }
  throw std::invalid_argument("generate_object: unknown class " + std::to_string(label));
}

// Every patch gets one point; the rest go by measure with largest remainders.
std::vector<std::size_t> allocate(const std::vector<Patch>& patches, std::size_t points) {
  const std::size_t k = patches.size();
  std::vector<std::size_t> counts(k, 1);
  const std::size_t spare = points - k;
  double total = 0.0;
  for (const auto& p : patches) total += p.measure;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t given = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double share = static_cast<double>(spare) * patches[i].measure / total;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    counts[i] += whole;
    given += whole;
    remainders.emplace_back(-(share - static_cast<double>(whole)), i);
  }
  std::sort(remainders.begin(), remainders.end());
  for (std::size_t i = 0; given < spare; ++i, ++given) ++counts[remainders[i % k].second];
  return counts;
}

void check_label(int label, const char* op) {
  if (label < 0 || label >= static_cast<int>(kClassNames.size())) {
    throw std::invalid_argument(std::string(op) + ": label " + std::to_string(label) + " out of range");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 9);
  std::string s(buf, res.ptr);
  if (s == "-0.000000000") s = "0.000000000";
  return s;
}

}  // namespace

std::string_view class_name(int label) {
  check_label(label, "class_name");
  return kClassNames[static_cast<std::size_t>(label)];
}

int parse_class_name(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i)
    if (kClassNames[i] == name) return static_cast<int>(i);
  throw std::invalid_argument("unknown class name '" + std::string(name) + "'");
}

LabeledCloud generate_object(int label, std::uint64_t seed, std::size_t points, const GeneratorOptions& options) {
  check_label(label, "generate_object");
  if (points < kMinObjectPoints) {
    throw std::invalid_argument("generate_object: need at least " + std::to_string(kMinObjectPoints) + " points");
  }
  const auto patches = patches_for(label);
  const auto counts = allocate(patches, points);

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double yaw = 2.0 * std::numbers::pi * unit(rng);
  Point3 offset{gauss(rng), gauss(rng), gauss(rng)};
  const double norm = std::sqrt(squared_distance(offset, Point3{}));
  const double reach = options.centroid_jitter * std::cbrt(unit(rng));
  offset = norm > 0.0 ? Point3{offset.x / norm * reach, offset.y / norm * reach, offset.z / norm * reach} : Point3{};

  const double c = std::cos(yaw), s = std::sin(yaw);
  LabeledCloud out;
  out.label = label;
  out.cloud.reserve(points);
  for (std::size_t p = 0; p < patches.size(); ++p) {
    for (std::size_t i = 0; i < counts[p]; ++i) {
      const double u = unit(rng);
      const double v = unit(rng);
      const Point3 q = patches[p].sample(u, v);
      Point3 posed{c * q.x - s * q.y + offset.x, s * q.x + c * q.y + offset.y, q.z + offset.z};
      posed.x += options.surface_noise * gauss(rng);
      posed.y += options.surface_noise * gauss(rng);
      posed.z += options.surface_noise * gauss(rng);
      out.cloud.push_back(posed);
    }
  }
  return out;
}

Point3 to_box_frame(const Point3& p, const BoxAnnotation& box) {
  const Point3 q = p - box.center;
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  return {c * q.x + s * q.y, -s * q.x + c * q.y, q.z};
}

bool point_in_box(const Point3& p, const BoxAnnotation& box) {
  const Point3 local = to_box_frame(p, box);
  return std::abs(local.x) <= box.size.x / 2 && std::abs(local.y) <= box.size.y / 2 &&
         std::abs(local.z) <= box.size.z / 2;
}

ExtractionResult extract_object_clouds(const PointCloud& scene, const std::vector<BoxAnnotation>& boxes) {
  ExtractionResult result;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const auto& box = boxes[b];
    if (!(box.size.x > 0 && box.size.y > 0 && box.size.z > 0)) {
      throw std::invalid_argument("extract_object_clouds: box " + std::to_string(b) + " has a non-positive size");
    }
    check_label(box.label, "extract_object_clouds");
    LabeledCloud object{{}, box.label};
    for (const auto& p : scene)
      if (point_in_box(p, box)) object.cloud.push_back(to_box_frame(p, box));
    if (object.cloud.empty()) {
      result.skipped_boxes.push_back(b);
      continue;
    }
    result.objects.push_back(std::move(object));
    result.source_boxes.push_back(b);
  }
  return result;
}

std::array<std::size_t, 4> class_counts(const std::vector<LabeledCloud>& data) {
  std::array<std::size_t, 4> counts{};
  for (const auto& s : data) {
    check_label(s.label, "class_counts");
    ++counts[static_cast<std::size_t>(s.label)];
  }
  return counts;
}

std::vector<LabeledCloud> balance_classes(const std::vector<LabeledCloud>& data, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("balance_classes: empty input");
  const auto counts = class_counts(data);
  const std::size_t target = *std::max_element(counts.begin(), counts.end());
  std::array<std::vector<std::size_t>, 4> members;
  for (std::size_t i = 0; i < data.size(); ++i) members[static_cast<std::size_t>(data[i].label)].push_back(i);

  Rng rng(seed);
  std::vector<LabeledCloud> out = data;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, members[c].size() - 1);
    for (std::size_t k = members[c].size(); k < target; ++k) out.push_back(data[members[c][pick(rng)]]);
  }
  return out;
}

Split train_test_split(const std::vector<LabeledCloud>& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("train_test_split: test fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, 4> members;
  for (std::size_t i = 0; i < data.size(); ++i) {
    check_label(data[i].label, "train_test_split");
    members[static_cast<std::size_t>(data[i].label)].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> in_test(data.size(), false);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& idx = members[c];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw std::invalid_argument("train_test_split: class " + std::string(kClassNames[c]) +
                                  " has fewer than 2 samples");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    for (std::size_t k = 0; k < n_test; ++k) in_test[idx[k]] = true;
  }
  Split split;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (in_test[i]) {
      split.test.push_back(data[i]);
      split.test_indices.push_back(i);
    } else {
      split.train.push_back(data[i]);
      split.train_indices.push_back(i);
    }
  }
  return split;
}

// ---- file IO ----

CloudFormatError::CloudFormatError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

std::string format_cloud(const PointCloud& cloud, std::optional<int> label) {
  std::string out;
  out.reserve(cloud.size() * 40 + 16);
  if (label) out += "# label " + std::to_string(*label) + "\n";
  for (const auto& p : cloud) {
    out += format_double(p.x);
    out += ' ';
    out += format_double(p.y);
    out += ' ';
    out += format_double(p.z);
    out += '\n';
  }
  return out;
}

CloudFile parse_cloud(std::string_view text, const std::string& origin) {
  CloudFile file;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    if (line_no == 1 && line.starts_with("# label ")) {
      std::string_view value = line.substr(8);
      int label = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), label);
      if (ec != std::errc{} || ptr != value.data() + value.size() || label < 0 ||
          label >= static_cast<int>(kClassNames.size())) {
        throw CloudFormatError(origin, line_no, "bad label header");
      }
      file.label = label;
      continue;
    }

    double xyz[3];
    const char* cur = line.data();
    const char* stop = line.data() + line.size();
    for (int k = 0; k < 3; ++k) {
      if (k > 0) {
        if (cur == stop || *cur != ' ') throw CloudFormatError(origin, line_no, "expected 3 values separated by single spaces");
        ++cur;
      }
      auto [ptr, ec] = std::from_chars(cur, stop, xyz[k]);
      if (ec != std::errc{} || ptr == cur) throw CloudFormatError(origin, line_no, "expected 3 numeric values");
      if (!std::isfinite(xyz[k])) throw CloudFormatError(origin, line_no, "non-finite value");
      cur = ptr;
    }
    if (cur != stop) throw CloudFormatError(origin, line_no, "trailing content after 3 values");
    file.cloud.push_back({xyz[0], xyz[1], xyz[2]});
  }
  if (file.cloud.empty()) throw CloudFormatError(origin, line_no, "no points");
  return file;
}

CloudFile load_cloud_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cloud(buf.str(), path.string());
}

PointCloud load_cloud(const fs::path& path) { return load_cloud_file(path).cloud; }

void save_cloud(const PointCloud& cloud, const fs::path& path, std::optional<int> label) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << format_cloud(cloud, label);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<fs::path> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::vector<fs::path> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    entries.push_back(path.parent_path() / line);
  }
  return entries;
}

void write_manifest(const fs::path& path, const std::vector<std::string>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  for (const auto& e : entries) out << e << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace pcc
