#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "snn/config.hpp"
#include "snn/dataset.hpp"
#include "snn/model.hpp"
#include "snn/neuron.hpp"

namespace snn {

/// Weight change for a pre/post pair separated by s = t_post - t_pre:
/// a_plus * exp(-s / tau_plus) for s >= 0, -a_minus * exp(s / tau_minus)
/// otherwise. Constant magnitude mode drops the exponential.
double stdp_window(double s, const StdpParams& params);

/// Pair-based update after post neuron `post` fired at `t_spike`: presynaptic
/// spikes in (t_spike - t_fore, t_spike) potentiate, spikes in
/// (t_spike, t_spike + t_back) depress, deltas of several spikes add up.
void apply_stdp_at(TimeUnit t_spike, int post, const SpikeField& pre, SynapseMatrix& synapses,
                   const StdpParams& params);

/// Depresses by silent_decay the winner's weights from every presynaptic
/// neuron that stayed silent for the whole SEDSI.
void micro_modify(int winner, const SpikeField& pre, SynapseMatrix& synapses,
                  const StdpParams& params);

/// Output neuron with the most spikes; ties go to the earliest first spike,
/// then to the lowest index. Empty when nobody fired.
std::optional<int> select_winner(const SpikeField& output);

/// Called once per time unit with the weights used to integrate that unit.
using WeightObserver = std::function<void(TimeUnit, const SynapseMatrix&)>;

/// One Algorithm-1 presentation: forward simulation with per-unit STDP
/// updates that apply from the next unit on, then micro_modify for the
/// winner. Returns the output spikes.
SpikeField train_on_image_single(const SpikeField& input, SynapseMatrix& synapses,
                                 const LifParams& lif, const StdpParams& stdp,
                                 const WeightObserver& observer = {});

/// Number of updates applied to each matrix during one bilayer presentation.
struct BilayerUpdates {
  int segments_updated = 0;  // subsegments in which the output layer fired
  int output_updates = 0;
  int hidden_updates = 0;
};

/// One Algorithm-2 presentation: the SEDSI is cut into equal subsegments;
/// after each one, if the output layer crossed threshold, both matrices are
/// updated around the time of the highest output potential.
BilayerUpdates train_on_image_bilayer(const SpikeField& input, SynapseMatrix& input_hidden,
                                      SynapseMatrix& hidden_output, const RunConfig& config);

struct EpochRecord {
  int epoch = 0;
  std::vector<double> per_class_accuracy;
  double overall = 0.0;
  bool bijective = false;
  std::optional<double> test_overall;  // when the trainer also scores the test split
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

/// Online single-layer STDP over the training split, one image at a time.
/// class_map is recalibrated after each epoch by majority vote of winners
/// over the training split.
TrainResult train_unsupervised_single(const Dataset& data, const RunConfig& config, int epochs,
                                      uint64_t seed);

/// Two-layer STDP over the training split (input -> hidden -> output), with
/// updates at each subsegment of the presentation.
TrainResult train_unsupervised_bilayer(const Dataset& data, const RunConfig& config, int epochs,
                                       uint64_t seed);

/// Output spikes of an unsupervised model for an already encoded image.
SpikeField forward_unsupervised(const Model& model, const SpikeField& input);

/// Winning output neuron for an image encoded with stream (seed, image_index),
/// or empty when the output layer stays silent.
std::optional<int> winner_neuron(const Model& model, const Image& image, uint64_t seed,
                                 uint64_t image_index);

/// Class label of the winner, or empty for no decision.
std::optional<int> classify(const Model& model, const Image& image, uint64_t seed = 0,
                            uint64_t image_index = 0);

/// Majority vote of winners per output neuron. `winners[k]` is the winner
/// for a sample labelled `labels[k]` (-1 for none).
std::vector<int> calibrate_class_map(const std::vector<int>& winners, const std::vector<int>& labels,
                                     int output_count, int class_count);

}  // namespace snn
