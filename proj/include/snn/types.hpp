#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace snn {

/// Dense row-major real matrix used for images, traces and weights.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Integer time unit on the simulation grid (conceptually 1 ms).
using TimeUnit = int;

/// Grayscale image; pixels(row, col) with row in [0, height).
struct Image {
  Matrix pixels;
  double max_value = 255.0;  // upper end of the valid intensity range

  int width() const { return static_cast<int>(pixels.cols()); }
  int height() const { return static_cast<int>(pixels.rows()); }
};

/// Firing record of one neuron over time units 0..duration inclusive.
class SpikeTrain {
 public:
  SpikeTrain() = default;
  explicit SpikeTrain(TimeUnit duration);

  TimeUnit duration() const { return duration_; }
  bool fired(TimeUnit t) const { return fires_[static_cast<size_t>(t)] != 0; }
  void set(TimeUnit t) { fires_.at(static_cast<size_t>(t)) = 1; }
  int count() const;
  std::vector<TimeUnit> times() const;
  bool silent() const { return count() == 0; }

  bool operator==(const SpikeTrain&) const = default;

 private:
  TimeUnit duration_ = 0;
  std::vector<uint8_t> fires_{0};
};

/// One spike train per neuron, all of the same duration. Neurons that come
/// from an image keep its geometry (index = row * width + col).
class SpikeField {
 public:
  SpikeField() = default;
  SpikeField(int neurons, TimeUnit duration);
  SpikeField(int width, int height, TimeUnit duration);

  int size() const { return static_cast<int>(trains_.size()); }
  int width() const { return width_; }
  int height() const { return height_; }
  TimeUnit duration() const { return duration_; }

  SpikeTrain& operator[](int i) { return trains_[static_cast<size_t>(i)]; }
  const SpikeTrain& operator[](int i) const { return trains_[static_cast<size_t>(i)]; }

  /// Indices of the neurons firing at each time unit, 0..duration.
  std::vector<std::vector<int>> schedule() const;
  long total_spikes() const;

  bool operator==(const SpikeField&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  TimeUnit duration_ = 0;
  std::vector<SpikeTrain> trains_;
};

/// Independent, reproducible random stream for item `index` of a run seeded
/// with `seed`.
std::mt19937_64 derive_stream(uint64_t seed, uint64_t index);

/// Uniform draw in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);

}  // namespace snn
