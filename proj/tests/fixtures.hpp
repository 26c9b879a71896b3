#pragma once

#include "snn/config.hpp"
#include "snn/dataset.hpp"

namespace snn::fixtures {

// Blob fixture settings: regular coding with no floor rate, so background
// pixels stay silent and the silent-input depression can separate classes.
inline RunConfig fixture_config() {
  RunConfig c;
  c.input_neurons = 0;
  c.encoder.method = EncoderMethod::kDeterministic;
  c.encoder.f_min = 0.0;
  return c;
}

// Same coding with the STDP bounds and rates shrunk to 0.6x and weights
// started near the top. Output potentials then climb steadily instead of
// resetting every few steps, which gives the supervised stage usable targets.
inline RunConfig guidance_config() {
  RunConfig c = fixture_config();
  const double s = 0.6;
  c.stdp.w_min *= s;
  c.stdp.w_max *= s;
  c.stdp.a_plus *= s;
  c.stdp.a_minus *= s;
  c.stdp.silent_decay *= s;
  c.stdp.init_low = 0.9;
  c.stdp.init_high = 1.0;
  return c;
}

inline Dataset fixture_data(uint64_t seed = 11) {
  OrthogonalSpec spec;
  spec.seed = seed;
  return orthogonal_fixture(spec);
}

}  // namespace snn::fixtures
