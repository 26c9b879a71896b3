#include "snn/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "snn/error.hpp"

namespace snn {

void LifParams::validate() const {
  if (!(p_th > p_rest)) throw ConfigError("p_th must exceed p_rest");
  if (t_ref < 0) throw ConfigError("t_ref must be >= 0");
  if (leak_d > 0.0) throw ConfigError("leak_d must be <= 0");
  if (leak_mode == LeakMode::kExponential && !(tau_m > 0.0))
    throw ConfigError("tau_m must be > 0 in exponential leak mode");
  if (duration < 1) throw ConfigError("sedsi_t must be >= 1");
  if (inhibit_floor > p_rest) throw ConfigError("inhibition floor must not exceed p_rest");
}

SynapseMatrix::SynapseMatrix(int pre_count, int post_count, double w_min, double w_max,
                             double fill)
    : weights_(Matrix::Constant(pre_count, post_count, std::clamp(fill, w_min, w_max))),
      w_min_(w_min), w_max_(w_max) {
  if (!(w_min < w_max)) throw ConfigError("synapse bounds require w_min < w_max");
}

SynapseMatrix::SynapseMatrix(Matrix weights, double w_min, double w_max)
    : w_min_(w_min), w_max_(w_max) {
  if (!(w_min < w_max)) throw ConfigError("synapse bounds require w_min < w_max");
  assign(weights);
}

void SynapseMatrix::set(int pre, int post, double value) {
  if (!std::isfinite(value)) throw NumericError("non-finite synaptic weight");
  weights_(pre, post) = std::clamp(value, w_min_, w_max_);
}

void SynapseMatrix::assign(const Matrix& weights) {
  if (!weights.allFinite()) throw NumericError("non-finite synaptic weight");
  weights_ = weights.cwiseMax(w_min_).cwiseMin(w_max_);
}

void SynapseMatrix::round_to_float32() {
  // A bound such as -1.2 has no exact float; step back inside when rounding crosses it.
  for (Eigen::Index k = 0; k < weights_.size(); ++k) {
    float f = static_cast<float>(weights_.data()[k]);
    if (f < w_min_) f = std::nextafter(f, std::numeric_limits<float>::infinity());
    if (f > w_max_) f = std::nextafter(f, -std::numeric_limits<float>::infinity());
    weights_.data()[k] = static_cast<double>(f);
  }
}

bool SynapseMatrix::within_bounds() const {
  return weights_.size() == 0 ||
         (weights_.allFinite() && weights_.minCoeff() >= w_min_ && weights_.maxCoeff() <= w_max_);
}

bool SynapseMatrix::operator==(const SynapseMatrix& other) const {
  return w_min_ == other.w_min_ && w_max_ == other.w_max_ &&
         weights_.rows() == other.weights_.rows() && weights_.cols() == other.weights_.cols() &&
         weights_ == other.weights_;
}

int LayerTrace::fired_at(TimeUnit t) const {
  for (int j = 0; j < spikes.size(); ++j)
    if (spikes[j].fired(t)) return j;
  return -1;
}

double input_current(std::span<const double> weights_for_post, std::span<const uint8_t> pre_fired) {
  if (weights_for_post.size() != pre_fired.size())
    throw DimensionError("input_current: " + std::to_string(weights_for_post.size()) +
                         " weights for " + std::to_string(pre_fired.size()) + " presynaptic neurons");
  double sum = 0.0;
  for (size_t i = 0; i < pre_fired.size(); ++i)
    if (pre_fired[i]) sum += weights_for_post[i];
  return sum;
}

void accumulate_currents(const SynapseMatrix& synapses, std::span<const int> firing,
                         std::span<double> currents) {
  const int n = synapses.post_count();
  std::fill(currents.begin(), currents.end(), 0.0);
  const double* base = synapses.weights().data();
  for (int i : firing) {
    const double* row = base + static_cast<std::ptrdiff_t>(i) * n;
    for (int j = 0; j < n; ++j) currents[static_cast<size_t>(j)] += row[j];
  }
}

NeuronState lif_step(NeuronState state, double current, const LifParams& params) {
  state.held = state.refractory_remaining > 0;
  if (state.held) {
    --state.refractory_remaining;
    state.potential = params.p_reset;
    return state;
  }
  if (params.leak_mode == LeakMode::kConstant) {
    state.potential += current;
    const double leak = std::abs(params.leak_d);
    if (state.potential > params.p_rest)
      state.potential = std::max(params.p_rest, state.potential - leak);
    else if (state.potential < params.p_rest)
      state.potential = std::min(params.p_rest, state.potential + leak);
  } else {
    state.potential +=
        (-(state.potential - params.p_rest) + params.r_m * current) / params.tau_m;
  }
  return state;
}

std::optional<int> fire_and_inhibit(std::vector<NeuronState>& layer, const LifParams& params,
                                    TimeUnit t) {
  int winner = -1;
  for (int j = 0; j < static_cast<int>(layer.size()); ++j) {
    const auto& s = layer[static_cast<size_t>(j)];
    if (s.held || s.refractory_remaining > 0 || s.potential < params.p_th) continue;
    if (winner < 0 || s.potential > layer[static_cast<size_t>(winner)].potential) winner = j;
  }
  if (winner < 0) return std::nullopt;

  for (int j = 0; j < static_cast<int>(layer.size()); ++j) {
    auto& s = layer[static_cast<size_t>(j)];
    if (j == winner) {
      if (s.spike_history.duration() >= t) s.spike_history.set(t);
      s.potential = params.p_reset;
      s.refractory_remaining = params.t_ref;
    } else if (!s.held && s.refractory_remaining == 0) {
      s.potential = std::clamp(s.potential + params.p_inhibit, params.inhibit_floor, params.p_th);
    }
  }
  return winner;
}

LayerSimulator::LayerSimulator(int neurons, const LifParams& params, bool lateral_inhibition)
    : params_(params), lateral_inhibition_(lateral_inhibition),
      states_(static_cast<size_t>(neurons)), peaks_(static_cast<size_t>(neurons), params.p_rest) {
  for (auto& s : states_) {
    s.potential = params.p_rest;
    s.spike_history = SpikeTrain(params.duration);
  }
}

std::vector<int> LayerSimulator::step(std::span<const double> currents, TimeUnit t) {
  if (currents.size() != states_.size())
    throw DimensionError("layer step: " + std::to_string(currents.size()) + " currents for " +
                         std::to_string(states_.size()) + " neurons");
  for (size_t j = 0; j < states_.size(); ++j) {
    states_[j] = lif_step(std::move(states_[j]), currents[j], params_);
    peaks_[j] = states_[j].potential;
  }
  std::vector<int> fired;
  if (lateral_inhibition_) {
    if (auto w = fire_and_inhibit(states_, params_, t)) fired.push_back(*w);
    return fired;
  }
  for (size_t j = 0; j < states_.size(); ++j) {
    auto& s = states_[j];
    if (!s.held && s.refractory_remaining == 0 && s.potential >= params_.p_th) {
      if (s.spike_history.duration() >= t) s.spike_history.set(t);
      s.potential = params_.p_reset;
      s.refractory_remaining = params_.t_ref;
      fired.push_back(static_cast<int>(j));
    }
  }
  return fired;
}

LayerTrace simulate_layer(const SpikeField& pre, const SynapseMatrix& synapses,
                          const LifParams& params, bool lateral_inhibition) {
  if (pre.size() != synapses.pre_count())
    throw DimensionError("simulate_layer: spike field has " + std::to_string(pre.size()) +
                         " neurons, synapses expect " + std::to_string(synapses.pre_count()));
  const int n = synapses.post_count();
  const TimeUnit duration = pre.duration();
  LifParams run = params;
  run.duration = duration;

  LayerTrace trace;
  trace.potentials = Matrix::Zero(n, duration + 1);
  trace.peaks = Matrix::Zero(n, duration + 1);
  trace.spikes = SpikeField(n, duration);

  LayerSimulator layer(n, run, lateral_inhibition);
  const auto schedule = pre.schedule();
  std::vector<double> currents(static_cast<size_t>(n));
  for (TimeUnit t = 0; t <= duration; ++t) {
    accumulate_currents(synapses, schedule[static_cast<size_t>(t)], currents);
    for (int j : layer.step(currents, t)) trace.spikes[j].set(t);
    for (int j = 0; j < n; ++j) {
      trace.potentials(j, t) = layer.states()[static_cast<size_t>(j)].potential;
      trace.peaks(j, t) = layer.peak(j);
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const LayerTrace& trace) {
  out << "time_unit";
  for (int j = 0; j < trace.neurons(); ++j) out << ",neuron_" << j;
  out << ",fired_index\n";
  out.precision(10);
  for (TimeUnit t = 0; t <= trace.duration(); ++t) {
    out << t;
    for (int j = 0; j < trace.neurons(); ++j) out << ',' << trace.potentials(j, t);
    out << ',' << trace.fired_at(t) << '\n';
  }
}

}  // namespace snn
