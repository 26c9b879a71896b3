#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>

#include "snn/types.hpp"

namespace snn {

/// 5x5 on-center receptive field. Every shortest Manhattan path between two
/// cells through the center crosses the same total weight; entries sum to 1.
inline constexpr std::array<std::array<double, 5>, 5> kReceptiveField = {{
    {-0.5, -0.125, 0.125, -0.125, -0.5},
    {-0.125, 0.125, 0.5, 0.125, -0.125},
    {0.125, 0.5, 1.0, 0.5, 0.125},
    {-0.125, 0.125, 0.5, 0.125, -0.125},
    {-0.5, -0.125, 0.125, -0.125, -0.5},
}};

enum class EncoderMethod { kRandom, kDeterministic };

struct EncoderSpec {
  EncoderMethod method = EncoderMethod::kRandom;
  TimeUnit duration = 70;  // SEDSI, in time units
  double f_min = 1.0;      // spikes emitted at pixel value 0
  double f_max = 20.0;     // spikes emitted at pixel value 1
  uint64_t seed = 0;

  void validate() const;
};

/// Kernel-weighted 5x5 neighbourhood sum, zero padding, same-size output.
/// Throws DimensionError for images smaller than 5x5.
Matrix apply_receptive_field(const Image& image);

/// Min-max scaling to [0, 1]. A constant matrix maps to all zeros.
Matrix normalize(const Matrix& incentive);

/// Fires at each time unit 1..T iff a uniform draw is below `p`.
SpikeTrain encode_random(double p, const EncoderSpec& spec, std::mt19937_64& rng);

/// Frequency interpolated linearly between f_min (p = 0) and f_max (p = 1).
double deterministic_frequency(double p, const EncoderSpec& spec);

/// Regular train: interval I = floor(T / f_det) - 1, spikes at multiples of
/// I + 1 up to T.
SpikeTrain encode_deterministic(double p, const EncoderSpec& spec);

/// Receptive field, normalization and per-pixel coding. The random method
/// draws from a stream derived from (spec.seed, image_index). An image whose
/// filtered incentive is constant (e.g. all zero) yields silent trains.
SpikeField encode_image(const Image& image, const EncoderSpec& spec, uint64_t image_index = 0);

/// Text spike-field format: header `spikefield v1 <w> <h> <T>`, then one line
/// per pixel listing its firing time units.
void write_spike_field(std::ostream& out, const SpikeField& field);
SpikeField read_spike_field(std::istream& in);

}  // namespace snn
