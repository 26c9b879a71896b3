#include "snn/encoding.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "snn/error.hpp"

namespace snn {

void EncoderSpec::validate() const {
  if (duration < 1) throw DomainError("encoder duration must be >= 1 time unit");
  if (!(f_min < f_max)) throw DomainError("encoder requires f_min < f_max");
  if (f_min < 0.0) throw DomainError("encoder requires f_min >= 0");
}

Matrix apply_receptive_field(const Image& image) {
  const int h = image.height();
  const int w = image.width();
  if (w < 5 || h < 5)
    throw DimensionError("image " + std::to_string(w) + "x" + std::to_string(h) +
                         " is smaller than the 5x5 receptive field");
  if (!image.pixels.allFinite()) throw NumericError("image contains non-finite pixels");

  Matrix out = Matrix::Zero(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int dr = -2; dr <= 2; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= h) continue;
        for (int dc = -2; dc <= 2; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= w) continue;
          acc += kReceptiveField[dr + 2][dc + 2] * image.pixels(rr, cc);
        }
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Matrix normalize(const Matrix& incentive) {
  if (!incentive.allFinite()) throw NumericError("incentive image contains non-finite values");
  if (incentive.size() == 0) return incentive;
  const double lo = incentive.minCoeff();
  const double hi = incentive.maxCoeff();
  if (!(hi > lo)) return Matrix::Zero(incentive.rows(), incentive.cols());
  return (incentive.array() - lo) / (hi - lo);
}

namespace {
void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw DomainError("pixel value " + std::to_string(p) + " outside [0, 1]");
}
}  // namespace

SpikeTrain encode_random(double p, const EncoderSpec& spec, std::mt19937_64& rng) {
  check_probability(p);
  SpikeTrain train(spec.duration);
  for (TimeUnit t = 1; t <= spec.duration; ++t)
    if (uniform01(rng) < p) train.set(t);
  return train;
}

double deterministic_frequency(double p, const EncoderSpec& spec) {
  check_probability(p);
  return spec.f_min + p * (spec.f_max - spec.f_min);
}

SpikeTrain encode_deterministic(double p, const EncoderSpec& spec) {
  const double f_det = deterministic_frequency(p, spec);
  SpikeTrain train(spec.duration);
  if (f_det <= 0.0) return train;
  const long interval = static_cast<long>(std::floor(spec.duration / f_det)) - 1;
  // Durations shorter than f_det collapse the interval; fire every unit then.
  const long period = interval + 1 >= 1 ? interval + 1 : 1;
  for (long t = period; t <= spec.duration; t += period) train.set(static_cast<TimeUnit>(t));
  return train;
}

SpikeField encode_image(const Image& image, const EncoderSpec& spec, uint64_t image_index) {
  spec.validate();
  const Matrix filtered = apply_receptive_field(image);
  SpikeField field(image.width(), image.height(), spec.duration);
  // Without contrast there is nothing to code, not even the f_min floor.
  if (!(filtered.maxCoeff() > filtered.minCoeff())) return field;
  const Matrix incentive = normalize(filtered);
  auto rng = derive_stream(spec.seed, image_index);
  const int w = image.width();
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      const double p = incentive(r, c);
      field[r * w + c] = spec.method == EncoderMethod::kRandom
                             ? encode_random(p, spec, rng)
                             : encode_deterministic(p, spec);
    }
  }
  return field;
}

void write_spike_field(std::ostream& out, const SpikeField& field) {
  out << "spikefield v1 " << field.width() << ' ' << field.height() << ' '
      << field.duration() << '\n';
  for (int i = 0; i < field.size(); ++i) {
    bool first = true;
    for (TimeUnit t : field[i].times()) {
      if (!first) out << ' ';
      out << t;
      first = false;
    }
    out << '\n';
  }
}

SpikeField read_spike_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("spike field: empty input");
  std::istringstream header(line);
  std::string magic, version;
  int w = 0, h = 0;
  TimeUnit duration = 0;
  header >> magic >> version >> w >> h >> duration;
  if (!header || magic != "spikefield") throw DataError("spike field: bad header '" + line + "'");
  if (version != "v1") throw DataError("spike field: unsupported version " + version);
  if (w <= 0 || h <= 0 || duration < 0) throw DataError("spike field: bad dimensions");

  SpikeField field(w, h, duration);
  for (int i = 0; i < field.size(); ++i) {
    if (!std::getline(in, line))
      throw DataError("spike field: expected " + std::to_string(field.size()) +
                      " pixel lines, got " + std::to_string(i));
    std::istringstream row(line);
    long t = 0;
    while (row >> t) {
      if (t < 0 || t > duration)
        throw DataError("spike field: time " + std::to_string(t) + " outside [0, T] on pixel line " +
                        std::to_string(i + 1));
      field[i].set(static_cast<TimeUnit>(t));
    }
    if (!row.eof()) throw DataError("spike field: malformed pixel line " + std::to_string(i + 1));
  }
  return field;
}

}  // namespace snn
