#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "snn/encoding.hpp"
#include "snn/error.hpp"

using namespace snn;

namespace {

Image blank(int w, int h, double v = 0.0) {
  Image img;
  img.pixels = Matrix::Constant(h, w, v);
  return img;
}

}  // namespace

TEST(ReceptiveField, KernelEntriesSumToOne) {
  double sum = 0.0;
  for (const auto& row : kReceptiveField)
    for (double v : row) sum += v;
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(ReceptiveField, KernelPathsThroughCentreCarryEqualWeight) {
  // Straight path from the left edge to the right edge through the centre,
  // versus a path that detours by one row before and after.
  const auto& k = kReceptiveField;
  const double straight = k[2][0] + k[2][1] + k[2][2] + k[2][3] + k[2][4];
  const double column = k[0][2] + k[1][2] + k[2][2] + k[3][2] + k[4][2];
  EXPECT_DOUBLE_EQ(straight, column);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      EXPECT_DOUBLE_EQ(k[r][c], k[4 - r][c]);
      EXPECT_DOUBLE_EQ(k[r][c], k[r][4 - c]);
      EXPECT_DOUBLE_EQ(k[r][c], k[c][r]);
    }
}

TEST(ReceptiveField, ZeroImageGivesZeroOutput) {
  EXPECT_TRUE(apply_receptive_field(blank(8, 8)).isZero());
}

TEST(ReceptiveField, ImpulseResponseReproducesKernel) {
  Image img = blank(5, 5);
  img.pixels(2, 2) = 1.0;
  const Matrix out = apply_receptive_field(img);
  EXPECT_DOUBLE_EQ(out(2, 2), 1.0);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) EXPECT_DOUBLE_EQ(out(r, c), kReceptiveField[4 - r][4 - c]);
  EXPECT_DOUBLE_EQ(out(0, 0), -0.5);
}

TEST(ReceptiveField, UniformInteriorIsPreserved) {
  const Matrix out = apply_receptive_field(blank(9, 9, 1.0));
  for (int r = 2; r < 7; ++r)
    for (int c = 2; c < 7; ++c) EXPECT_NEAR(out(r, c), 1.0, 1e-12);
}

TEST(ReceptiveField, RejectsSmallImages) {
  EXPECT_THROW(apply_receptive_field(blank(4, 9)), DimensionError);
}

TEST(Normalize, MidpointOfRange) {
  Matrix m(1, 3);
  m << 2.0, 6.0, 10.0;
  const Matrix n = normalize(m);
  EXPECT_DOUBLE_EQ(n(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(n(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(n(0, 2), 1.0);
}

TEST(Normalize, ConstantMapsToZero) {
  EXPECT_TRUE(normalize(Matrix::Constant(4, 4, 3.7)).isZero());
}

TEST(Normalize, UnitRangeUnchanged) {
  Matrix m(2, 2);
  m << 0.0, 0.25, 0.75, 1.0;
  EXPECT_EQ(normalize(m), m);
}

TEST(Normalize, RejectsNonFinite) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW(normalize(m), NumericError);
}

TEST(RandomEncoder, ExtremeProbabilities) {
  EncoderSpec spec;
  spec.duration = 100;
  auto rng = derive_stream(5, 0);
  EXPECT_EQ(encode_random(0.0, spec, rng).count(), 0);
  const SpikeTrain all = encode_random(1.0, spec, rng);
  EXPECT_EQ(all.count(), 100);
  EXPECT_FALSE(all.fired(0));
}

TEST(RandomEncoder, RejectsOutOfRangeProbability) {
  EncoderSpec spec;
  auto rng = derive_stream(5, 0);
  EXPECT_THROW(encode_random(1.5, spec, rng), DomainError);
  EXPECT_THROW(encode_random(-0.1, spec, rng), DomainError);
}

TEST(RandomEncoder, MeanCountNearProbabilityTimesDuration) {
  EncoderSpec spec;
  spec.duration = 100;
  auto rng = derive_stream(17, 3);
  const int trials = 4000;
  double sum = 0.0;
  for (int k = 0; k < trials; ++k) sum += encode_random(0.3, spec, rng).count();
  const double sigma = std::sqrt(100 * 0.3 * 0.7 / trials);
  EXPECT_NEAR(sum / trials, 30.0, 4 * sigma);
}

TEST(DeterministicEncoder, InterpolatedFrequency) {
  EncoderSpec spec;
  spec.duration = 100;
  EXPECT_NEAR(deterministic_frequency(0.788, spec), 15.972, 1e-12);
  EXPECT_DOUBLE_EQ(deterministic_frequency(0.0, spec), 1.0);
  EXPECT_DOUBLE_EQ(deterministic_frequency(1.0, spec), 20.0);
}

TEST(DeterministicEncoder, HandCountedPlacements) {
  EncoderSpec spec;
  spec.duration = 100;
  // floor(100 / 15.972) - 1 = 5, so one spike every 6 units.
  const SpikeTrain t = encode_deterministic(0.788, spec);
  EXPECT_EQ(t.count(), 16);
  EXPECT_EQ(t.times().front(), 6);
  EXPECT_EQ(t.times().back(), 96);

  const SpikeTrain lone = encode_deterministic(0.0, spec);
  ASSERT_EQ(lone.count(), 1);
  EXPECT_EQ(lone.times().front(), 100);
}

TEST(DeterministicEncoder, ShortDurationFiresEveryUnit) {
  EncoderSpec spec;
  spec.duration = 10;
  EXPECT_EQ(encode_deterministic(1.0, spec).count(), 10);
}

TEST(DeterministicEncoder, ZeroFloorStaysSilent) {
  EncoderSpec spec;
  spec.f_min = 0.0;
  EXPECT_TRUE(encode_deterministic(0.0, spec).silent());
}

TEST(EncoderSpec, Validation) {
  EncoderSpec spec;
  spec.f_min = 30.0;
  EXPECT_THROW(spec.validate(), DomainError);
  spec = {};
  spec.f_min = -1.0;
  EXPECT_THROW(spec.validate(), DomainError);
  spec = {};
  spec.duration = 0;
  EXPECT_THROW(spec.validate(), DomainError);
}

TEST(EncodeImage, ZeroImageIsSilentForBothMethods) {
  for (auto method : {EncoderMethod::kRandom, EncoderMethod::kDeterministic}) {
    EncoderSpec spec;
    spec.method = method;
    EXPECT_EQ(encode_image(blank(8, 8), spec).total_spikes(), 0);
  }
}

TEST(EncodeImage, SeededRandomIsReproducible) {
  Image img = blank(12, 10);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 12; ++c) img.pixels(r, c) = (r * 31 + c * 17) % 256;
  EncoderSpec spec;
  spec.seed = 99;
  EXPECT_EQ(encode_image(img, spec, 4), encode_image(img, spec, 4));
  EXPECT_NE(encode_image(img, spec, 4), encode_image(img, spec, 5));
}

TEST(EncodeImage, OneTrainPerPixel) {
  Image img = blank(128, 128);
  img.pixels(64, 64) = 255.0;
  EncoderSpec spec;
  const SpikeField f = encode_image(img, spec);
  EXPECT_EQ(f.size(), 16384);
  EXPECT_EQ(f.width(), 128);
  EXPECT_EQ(f.height(), 128);
  EXPECT_EQ(f.duration(), spec.duration);
}

TEST(SpikeFieldFormat, RoundTrip) {
  Image img = blank(6, 7);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 6; ++c) img.pixels(r, c) = (r * c * 13) % 200;
  EncoderSpec spec;
  spec.seed = 3;
  const SpikeField f = encode_image(img, spec);
  std::stringstream ss;
  write_spike_field(ss, f);
  EXPECT_EQ(ss.str().rfind("spikefield v1 6 7 70\n", 0), 0u);
  EXPECT_EQ(read_spike_field(ss), f);
}

TEST(SpikeFieldFormat, RejectsBadInput) {
  std::stringstream wrong_magic("spikes v1 2 2 5\n\n\n\n\n");
  EXPECT_THROW(read_spike_field(wrong_magic), DataError);
  std::stringstream late("spikefield v1 1 1 5\n9\n");
  EXPECT_THROW(read_spike_field(late), DataError);
  std::stringstream short_body("spikefield v1 2 2 5\n1\n");
  EXPECT_THROW(read_spike_field(short_body), DataError);
  std::stringstream junk("spikefield v1 1 1 5\n1 x\n");
  EXPECT_THROW(read_spike_field(junk), DataError);
}
