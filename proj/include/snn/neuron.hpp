#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "snn/types.hpp"

namespace snn {

enum class LeakMode { kConstant, kExponential };

/// LIF hyperparameters. Potentials in mV, times in time units.
struct LifParams {
  double p_rest = 0.0;
  double p_reset = 0.0;
  double p_th = 80.0;
  double leak_d = -5.0;      // constant-mode leak per time unit
  TimeUnit t_ref = 20;
  double p_inhibit = -500.0;  // lateral inhibition applied to losers
  double inhibit_floor = -500.0;
  TimeUnit duration = 70;     // SEDSI
  LeakMode leak_mode = LeakMode::kConstant;
  double tau_m = 10.0;  // exponential mode only
  double r_m = 1.0;     // exponential mode only

  void validate() const;
};

struct NeuronState {
  double potential = 0.0;
  TimeUnit refractory_remaining = 0;
  bool held = false;  // spent the last step in its refractory period
  SpikeTrain spike_history;
};

/// Dense pre x post weights; every entry stays within [w_min, w_max].
class SynapseMatrix {
 public:
  SynapseMatrix() = default;
  SynapseMatrix(int pre_count, int post_count, double w_min, double w_max, double fill = 0.0);
  SynapseMatrix(Matrix weights, double w_min, double w_max);

  int pre_count() const { return static_cast<int>(weights_.rows()); }
  int post_count() const { return static_cast<int>(weights_.cols()); }
  double w_min() const { return w_min_; }
  double w_max() const { return w_max_; }

  double operator()(int pre, int post) const { return weights_(pre, post); }
  void set(int pre, int post, double value);
  void add(int pre, int post, double delta) { set(pre, post, weights_(pre, post) + delta); }

  const Matrix& weights() const { return weights_; }
  /// Replaces all weights, clamping into the bounds.
  void assign(const Matrix& weights);
  /// Rounds every weight to the nearest float32 (checkpoint precision).
  void round_to_float32();
  bool within_bounds() const;

  bool operator==(const SynapseMatrix& other) const;

 private:
  Matrix weights_;
  double w_min_ = 0.0;
  double w_max_ = 0.0;
};

/// Membrane potentials and output spikes of one layer over a SEDSI.
struct LayerTrace {
  Matrix potentials;  // neurons x (T+1), value stored after firing/inhibition
  Matrix peaks;       // neurons x (T+1), value before the threshold test
  SpikeField spikes;

  int neurons() const { return static_cast<int>(potentials.rows()); }
  TimeUnit duration() const { return static_cast<TimeUnit>(potentials.cols()) - 1; }
  /// Index of the neuron firing at t, or -1. Lowest index when several fire.
  int fired_at(TimeUnit t) const;
};

/// Sum of the weights of presynaptic neurons firing now.
double input_current(std::span<const double> weights_for_post, std::span<const uint8_t> pre_fired);

/// Currents into every post neuron from the listed firing presynaptic neurons.
void accumulate_currents(const SynapseMatrix& synapses, std::span<const int> firing,
                         std::span<double> currents);

/// Integrate then leak; refractory neurons only count down.
NeuronState lif_step(NeuronState state, double current, const LifParams& params);

/// Winner-takes-all threshold test at time t. The supra-threshold neuron with
/// the highest potential fires (lowest index on ties); every other
/// non-refractory neuron is inhibited, clamped to [inhibit_floor, p_th].
std::optional<int> fire_and_inhibit(std::vector<NeuronState>& layer, const LifParams& params,
                                    TimeUnit t);

/// Incremental simulation of one layer, one time unit at a time. Used
/// directly by the online trainers; simulate_layer wraps it.
class LayerSimulator {
 public:
  LayerSimulator(int neurons, const LifParams& params, bool lateral_inhibition = true);

  /// Advances to time t with the given per-neuron input currents and
  /// returns the neurons that fired.
  std::vector<int> step(std::span<const double> currents, TimeUnit t);

  const std::vector<NeuronState>& states() const { return states_; }
  /// Potential of neuron j before this step's threshold test.
  double peak(int j) const { return peaks_[static_cast<size_t>(j)]; }
  int neurons() const { return static_cast<int>(states_.size()); }

 private:
  LifParams params_;
  bool lateral_inhibition_;
  std::vector<NeuronState> states_;
  std::vector<double> peaks_;
};

/// Forward simulation of a layer for t = 0..T. Deterministic.
LayerTrace simulate_layer(const SpikeField& pre, const SynapseMatrix& synapses,
                          const LifParams& params, bool lateral_inhibition = true);

/// CSV: time_unit, neuron_0..neuron_{n-1}, fired_index (-1 when silent).
void write_trace_csv(std::ostream& out, const LayerTrace& trace);

}  // namespace snn
