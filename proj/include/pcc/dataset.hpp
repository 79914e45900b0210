#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcc/geom.hpp"

namespace pcc {

enum class ObjectClass : int { kCar = 0, kTruck = 1, kPerson = 2, kBicycle = 3 };

inline constexpr std::array<std::string_view, 4> kClassNames{"car", "truck", "person", "bicycle"};

std::string_view class_name(int label);
int parse_class_name(std::string_view name);

struct LabeledCloud {
  PointCloud cloud;
  int label = 0;
};

struct BoxAnnotation {
  Point3 center;
  Point3 size;  // length (local x), width (local y), height (local z)
  double yaw = 0.0;
  int label = 0;
};

struct GeneratorOptions {
  double surface_noise = 0.02;   // Gaussian σ per coordinate, meters
  double centroid_jitter = 0.5;  // max displacement of the object centroid, meters
};

inline constexpr std::size_t kMinObjectPoints = 8;

// Samples a surface cloud of one synthetic object, posed with a uniform yaw
// and a bounded centroid offset, with Gaussian surface noise.
LabeledCloud generate_object(int label, std::uint64_t seed, std::size_t points,
                             const GeneratorOptions& options = {});

// True when p lies inside the yaw-rotated box (boundary inclusive).
bool point_in_box(const Point3& p, const BoxAnnotation& box);
// p expressed in the box frame: centered, yaw-aligned.
Point3 to_box_frame(const Point3& p, const BoxAnnotation& box);

struct ExtractionResult {
  std::vector<LabeledCloud> objects;
  std::vector<std::size_t> source_boxes;   // box index for each object
  std::vector<std::size_t> skipped_boxes;  // boxes that captured no points
};

ExtractionResult extract_object_clouds(const PointCloud& scene, const std::vector<BoxAnnotation>& boxes);

// Upsamples every class to the largest class count by drawing existing members
// with replacement. Originals keep their order; duplicates follow.
std::vector<LabeledCloud> balance_classes(const std::vector<LabeledCloud>& data, std::uint64_t seed);

struct Split {
  std::vector<LabeledCloud> train;
  std::vector<LabeledCloud> test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

// Stratified split; each class contributes round(fraction * count) test
// samples, clamped so both sides keep at least one.
Split train_test_split(const std::vector<LabeledCloud>& data, double test_fraction, std::uint64_t seed);

std::array<std::size_t, 4> class_counts(const std::vector<LabeledCloud>& data);

// ---- point-cloud text files ----

class CloudFormatError : public std::runtime_error {
 public:
  CloudFormatError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CloudFile {
  PointCloud cloud;
  std::optional<int> label;
};

CloudFile load_cloud_file(const std::filesystem::path& path);
PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, std::optional<int> label = {});
std::string format_cloud(const PointCloud& cloud, std::optional<int> label = {});
CloudFile parse_cloud(std::string_view text, const std::string& origin = "<memory>");

// Manifest: one path per line, relative to the manifest's directory.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& entries);

}  // namespace pcc
