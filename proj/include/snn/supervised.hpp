#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <vector>

#include "snn/config.hpp"
#include "snn/dataset.hpp"
#include "snn/model.hpp"
#include "snn/stdp.hpp"

namespace snn {

/// Causal exponential spike response g(d) = exp(-d / tau_s), zero for d < 0.
struct ResponseKernel {
  double tau_s = 10.0;
  double operator()(double delta) const;
  void validate() const;
};

/// G(i, t) = sum over spikes t_k <= t of neuron i of g(t - t_k).
Matrix filtered_inputs(const SpikeField& pre, const ResponseKernel& kernel);

/// Reset-free potentials p_j(t) = sum_i w_ij G(i, t); post x (T+1).
Matrix potential_trace(const Matrix& weights, const SpikeField& pre, const ResponseKernel& kernel);

/// Summed elementwise Huber loss.
double huber_loss(const Matrix& actual, const Matrix& target, double delta);
double huber_derivative(double d, double delta);

/// Exact gradient of huber_loss(potential_trace(weights), target).
Matrix grad_weights(const Matrix& weights, const SpikeField& pre, const Matrix& target,
                    const ResponseKernel& kernel, double delta);

struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  long step_count = 0;

  AdamState() = default;
  AdamState(Eigen::Index rows, Eigen::Index cols);
};

/// Learning rate in effect for an update taken after `steps_taken` steps.
double scheduled_lr(long steps_taken, const SupervisedParams& params);

/// One bias-corrected Adam update in place. Returns the learning rate used.
double adam_step(AdamState& state, const Matrix& grads, Matrix& weights,
                 const SupervisedParams& params);

/// Per-class target potential traces, class x (T+1).
struct GuidanceBundle {
  Matrix traces;

  int class_count() const { return static_cast<int>(traces.rows()); }
  TimeUnit duration() const { return static_cast<TimeUnit>(traces.cols()) - 1; }
  void validate() const;
  bool operator==(const GuidanceBundle& other) const { return traces == other.traces; }
};

/// Runs the spiking model on one representative per class (encoded with
/// stream (seed, class index)) and keeps the class neuron's potential trace.
GuidanceBundle extract_guidance(const Model& model, const std::vector<Image>& representatives,
                                uint64_t seed);

/// One training image per class, preferring images the model already
/// assigns to their own class.
std::vector<Image> select_representatives(const Model& model, const Dataset& data, uint64_t seed);

/// CSV rows: class index, then T+1 potentials.
void write_guidance_csv(std::ostream& out, const GuidanceBundle& bundle);
GuidanceBundle read_guidance_csv(std::istream& in);

/// Row `label` holds the guidance trace, every other row sits at p_rest.
Matrix target_matrix(const GuidanceBundle& guidance, int label, double p_rest);

TrainResult train_supervised(const Dataset& data, const GuidanceBundle& guidance,
                             const RunConfig& config, int epochs, uint64_t seed);

struct SupervisedDecision {
  int label = 0;
  std::vector<double> losses;  // one per class hypothesis
};

SupervisedDecision classify_supervised(const Model& model, const Image& image, uint64_t seed = 0,
                                       uint64_t image_index = 0);

}  // namespace snn
