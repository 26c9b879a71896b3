#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "snn/types.hpp"

namespace snn {

enum class Split { kTrain, kTest };
const char* to_string(Split split);

struct Sample {
  Image image;
  int label = 0;
  Split split = Split::kTrain;
  std::string path;  // source file, empty for in-memory samples
};

struct Dataset {
  std::vector<std::string> classes;
  std::vector<Sample> samples;
  std::filesystem::path root;
  uint64_t seed = 0;

  int class_count() const { return static_cast<int>(classes.size()); }
  std::vector<Sample> split(Split which) const;
  /// Rejects out-of-range labels and mismatched image sizes.
  void validate() const;
};

struct SplitSpec {
  double test_fraction = 0.3;  // used only for class directories without train/ and test/
  uint64_t seed = 0;
};

/// Loads root/<class>/{train,test}/<image> (or root/<class>/<image> split by
/// a seeded ratio). Ordering is lexicographic by path.
Dataset load_dataset(const std::filesystem::path& root, const SplitSpec& split = {});

struct SyntheticSpec {
  int class_count = 3;
  int per_class = 50;       // training samples per class
  int test_per_class = 20;  // test samples per class
  int size = 64;
  uint64_t seed = 7;

  void validate() const;
};

/// Speckled procedural targets: one base pattern per class (oriented bar,
/// blob cluster, ring) times unit-mean exponential speckle, 8-bit range.
Dataset synthesize_dataset(const SyntheticSpec& spec);

/// Saves every sample as root/<sample.path> (PGM) plus a manifest.txt whose
/// first line is `# <description>`. Sets ds.root.
void write_dataset(const std::filesystem::path& root, Dataset& ds, const std::string& description);

/// Writes the synthetic dataset as PGM files plus manifest.txt under root.
Dataset generate_synthetic(const std::filesystem::path& root, const SyntheticSpec& spec);

/// Smooth blob patterns with disjoint supports: class k owns its own set of
/// blob centres. Each image jitters the centres by up to `jitter` pixels and
/// scales the amplitude by up to +-20%.
struct OrthogonalSpec {
  int class_count = 3;
  int per_class = 30;
  int test_per_class = 10;
  int size = 32;
  double blob_sigma = 3.0;
  int blobs_per_class = 1;
  int jitter = 1;
  uint64_t seed = 11;
  void validate() const;
};

Dataset orthogonal_fixture(const OrthogonalSpec& spec);

/// Noise-free template of class `label` (unit peak, no jitter).
Matrix orthogonal_template(const OrthogonalSpec& spec, int label);

struct NoiseSpec {
  double snr_db = 10.0;  // +inf leaves images untouched
  uint64_t seed = 0;
};

/// Mean squared pixel value.
double signal_power(const Image& image);

/// Zero-mean Gaussian field with variance signal_power / 10^(snr_db / 10).
Matrix noise_field(const Image& image, double snr_db, std::mt19937_64& rng);

/// Adds white noise at the requested SNR and clamps to [0, max_value].
/// Throws NumericError for an all-zero image.
Image add_noise(const Image& image, const NoiseSpec& spec, std::mt19937_64& rng);

}  // namespace snn
