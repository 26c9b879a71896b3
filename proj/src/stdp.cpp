#include "snn/stdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "snn/encoding.hpp"
#include "snn/error.hpp"
#include "training_common.hpp"

namespace snn {

double stdp_window(double s, const StdpParams& params) {
  if (params.magnitude == StdpMagnitude::kConstant) return s >= 0.0 ? params.a_plus : -params.a_minus;
  if (s >= 0.0) return params.a_plus * std::exp(-s / params.tau_plus);
  return -params.a_minus * std::exp(s / params.tau_minus);
}

void apply_stdp_at(TimeUnit t_spike, int post, const SpikeField& pre, SynapseMatrix& synapses,
                   const StdpParams& params) {
  if (post < 0 || post >= synapses.post_count())
    throw DimensionError("apply_stdp_at: post index " + std::to_string(post) + " out of range");
  if (pre.size() != synapses.pre_count())
    throw DimensionError("apply_stdp_at: spike field has " + std::to_string(pre.size()) +
                         " neurons, synapses expect " + std::to_string(synapses.pre_count()));
  const TimeUnit duration = pre.duration();
  const TimeUnit fore_lo = std::max<TimeUnit>(0, t_spike - params.t_fore + 1);
  const TimeUnit back_hi = std::min<TimeUnit>(duration, t_spike + params.t_back - 1);
  for (int i = 0; i < pre.size(); ++i) {
    const SpikeTrain& train = pre[i];
    double delta = 0.0;
    for (TimeUnit t = fore_lo; t < t_spike && t <= duration; ++t)
      if (train.fired(t)) delta += stdp_window(t_spike - t, params);
    for (TimeUnit t = std::max<TimeUnit>(t_spike + 1, 0); t <= back_hi; ++t)
      if (train.fired(t)) delta += stdp_window(t_spike - t, params);
    if (delta != 0.0) synapses.add(i, post, delta);
  }
}

void micro_modify(int winner, const SpikeField& pre, SynapseMatrix& synapses,
                  const StdpParams& params) {
  if (winner < 0 || winner >= synapses.post_count())
    throw DimensionError("micro_modify: winner index " + std::to_string(winner) + " out of range");
  if (pre.size() != synapses.pre_count())
    throw DimensionError("micro_modify: spike field does not match synapses");
  for (int i = 0; i < pre.size(); ++i)
    if (pre[i].silent()) synapses.add(i, winner, -params.silent_decay);
}

std::optional<int> select_winner(const SpikeField& output) {
  int best = -1, best_count = 0;
  TimeUnit best_first = 0;
  for (int j = 0; j < output.size(); ++j) {
    const auto times = output[j].times();
    if (times.empty()) continue;
    const int count = static_cast<int>(times.size());
    if (best < 0 || count > best_count || (count == best_count && times.front() < best_first)) {
      best = j;
      best_count = count;
      best_first = times.front();
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

SpikeField train_on_image_single(const SpikeField& input, SynapseMatrix& synapses,
                                 const LifParams& lif, const StdpParams& stdp,
                                 const WeightObserver& observer) {
  if (input.size() != synapses.pre_count())
    throw DimensionError("training image has " + std::to_string(input.size()) +
                         " input neurons, model expects " + std::to_string(synapses.pre_count()));
  const int n = synapses.post_count();
  const TimeUnit duration = input.duration();
  LifParams run = lif;
  run.duration = duration;
  LayerSimulator layer(n, run, true);
  SpikeField output(n, duration);
  const auto schedule = input.schedule();
  std::vector<double> currents(static_cast<size_t>(n));
  for (TimeUnit t = 0; t <= duration; ++t) {
    if (observer) observer(t, synapses);
    accumulate_currents(synapses, schedule[static_cast<size_t>(t)], currents);
    for (int j : layer.step(currents, t)) {
      output[j].set(t);
      apply_stdp_at(t, j, input, synapses, stdp);
    }
  }
  if (auto winner = select_winner(output)) micro_modify(*winner, input, synapses, stdp);
  return output;
}

namespace {

StdpParams scaled(const StdpParams& p, double s) {
  StdpParams out = p;
  out.a_plus *= s;
  out.a_minus *= s;
  out.silent_decay *= s;
  out.w_min *= s;
  out.w_max *= s;
  return out;
}

SynapseMatrix random_synapses(int pre, int post, const StdpParams& p, std::mt19937_64& rng) {
  SynapseMatrix syn(pre, post, p.w_min, p.w_max);
  Matrix w(pre, post);
  const double lo = p.init_low * p.w_max, hi = p.init_high * p.w_max;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    w.data()[k] = static_cast<float>(lo + (hi - lo) * uniform01(rng));
  syn.assign(w);
  return syn;
}

}  // namespace

BilayerUpdates train_on_image_bilayer(const SpikeField& input, SynapseMatrix& input_hidden,
                                      SynapseMatrix& hidden_output, const RunConfig& config) {
  if (input.size() != input_hidden.pre_count())
    throw DimensionError("training image does not match the input layer");
  if (input_hidden.post_count() != hidden_output.pre_count())
    throw DimensionError("hidden layer sizes of the two synapse matrices differ");
  const TimeUnit duration = input.duration();
  const int segments = config.bilayer.subsegments;
  if (duration % segments != 0)
    throw ConfigError("sedsi_t " + std::to_string(duration) + " is not divisible into " +
                      std::to_string(segments) + " subsegments");
  const TimeUnit seg_len = duration / segments;
  const TimeUnit half = config.bilayer.correlation_halfwidth;
  const StdpParams& stdp01 = config.stdp;
  const StdpParams stdp12 = scaled(config.stdp, config.bilayer.hidden_weight_scale);

  const int hidden_n = input_hidden.post_count();
  const int out_n = hidden_output.post_count();
  LifParams run = config.lif;
  run.duration = duration;
  LayerSimulator hidden(hidden_n, run, config.bilayer.hidden_inhibition);
  LayerSimulator output(out_n, run, true);
  SpikeField hidden_spikes(hidden_n, duration);
  SpikeField output_spikes(out_n, duration);
  Matrix output_peaks = Matrix::Constant(out_n, duration + 1, run.p_rest);
  const auto schedule = input.schedule();
  std::vector<double> hidden_currents(static_cast<size_t>(hidden_n));
  std::vector<double> output_currents(static_cast<size_t>(out_n));

  BilayerUpdates updates;
  for (int k = 0; k < segments; ++k) {
    const TimeUnit seg_lo = k == 0 ? 0 : k * seg_len + 1;
    const TimeUnit seg_hi = (k + 1) * seg_len;
    for (TimeUnit t = seg_lo; t <= seg_hi; ++t) {
      accumulate_currents(input_hidden, schedule[static_cast<size_t>(t)], hidden_currents);
      const auto hidden_fired = hidden.step(hidden_currents, t);
      for (int h : hidden_fired) hidden_spikes[h].set(t);
      accumulate_currents(hidden_output, hidden_fired, output_currents);
      for (int j : output.step(output_currents, t)) output_spikes[j].set(t);
      for (int j = 0; j < out_n; ++j) output_peaks(j, t) = output.peak(j);
    }

    // Highest output potential in this subsegment; only threshold crossings count.
    int post = -1;
    TimeUnit t_max = 0;
    double best = run.p_th;
    for (TimeUnit t = seg_lo; t <= seg_hi; ++t)
      for (int j = 0; j < out_n; ++j)
        if (output_spikes[j].fired(t) && (post < 0 || output_peaks(j, t) > best)) {
          post = j;
          t_max = t;
          best = output_peaks(j, t);
        }
    if (post < 0) continue;
    ++updates.segments_updated;

    const TimeUnit lo = std::max(seg_lo, t_max - half);
    const TimeUnit hi = std::min(seg_hi, t_max + half);
    for (int h = 0; h < hidden_n; ++h) {
      double delta = 0.0;
      for (TimeUnit t = lo; t <= hi; ++t)
        if (hidden_spikes[h].fired(t)) delta += stdp_window(t_max - t, stdp12);
      if (delta != 0.0) {
        hidden_output.add(h, post, delta);
        ++updates.output_updates;
      }
    }
    for (int h = 0; h < hidden_n; ++h) {
      for (TimeUnit th = lo; th <= hi; ++th) {
        if (!hidden_spikes[h].fired(th)) continue;
        for (int i = 0; i < input.size(); ++i) {
          double delta = 0.0;
          for (TimeUnit t = lo; t <= hi; ++t)
            if (input[i].fired(t)) delta += stdp_window(th - t, stdp01);
          if (delta != 0.0) {
            input_hidden.add(i, h, delta);
            ++updates.hidden_updates;
          }
        }
      }
    }
  }
  if (auto winner = select_winner(output_spikes)) micro_modify(*winner, hidden_spikes, hidden_output, stdp12);
  return updates;
}

std::vector<int> calibrate_class_map(const std::vector<int>& winners, const std::vector<int>& labels,
                                     int output_count, int class_count) {
  std::vector<std::vector<int>> votes(static_cast<size_t>(output_count),
                                      std::vector<int>(static_cast<size_t>(class_count), 0));
  for (size_t k = 0; k < winners.size(); ++k)
    if (winners[k] >= 0) ++votes[static_cast<size_t>(winners[k])][static_cast<size_t>(labels[k])];
  std::vector<int> map(static_cast<size_t>(output_count), -1);
  for (int j = 0; j < output_count; ++j) {
    const auto& v = votes[static_cast<size_t>(j)];
    const auto best = std::max_element(v.begin(), v.end());
    if (*best > 0) map[static_cast<size_t>(j)] = static_cast<int>(best - v.begin());
  }
  return map;
}

SpikeField forward_unsupervised(const Model& model, const SpikeField& input) {
  if (model.mode == ModelMode::kSupervised || model.layers.empty())
    throw FormatError("forward_unsupervised needs an unsupervised model");
  if (input.size() != model.input_count())
    throw DimensionError("image has " + std::to_string(input.size()) + " pixels, model expects " +
                         std::to_string(model.input_count()));
  if (model.layers.size() == 1) return simulate_layer(input, model.layers[0], model.config.lif).spikes;
  const LayerTrace hidden =
      simulate_layer(input, model.layers[0], model.config.lif, model.config.bilayer.hidden_inhibition);
  return simulate_layer(hidden.spikes, model.layers[1], model.config.lif).spikes;
}

std::optional<int> winner_neuron(const Model& model, const Image& image, uint64_t seed,
                                 uint64_t image_index) {
  if (image.width() != model.input_width || image.height() != model.input_height)
    throw DimensionError("image is " + std::to_string(image.width()) + "x" +
                         std::to_string(image.height()) + ", model expects " +
                         std::to_string(model.input_width) + "x" + std::to_string(model.input_height));
  EncoderSpec spec = model.config.encoder;
  spec.seed = seed;
  return select_winner(forward_unsupervised(model, encode_image(image, spec, image_index)));
}

std::optional<int> classify(const Model& model, const Image& image, uint64_t seed,
                            uint64_t image_index) {
  const auto winner = winner_neuron(model, image, seed, image_index);
  if (!winner) return std::nullopt;
  const int label = model.class_map.at(static_cast<size_t>(*winner));
  if (label < 0) return std::nullopt;
  return label;
}

namespace detail {

Prepared prepare_training(const Dataset& data, const RunConfig& config, ModelMode mode, uint64_t seed) {
  config.validate();
  data.validate();
  Prepared p;
  p.train = data.split(Split::kTrain);
  if (p.train.empty()) throw DataError("training split is empty");
  std::vector<int> per_class(static_cast<size_t>(data.class_count()), 0);
  for (const auto& s : p.train) ++per_class[static_cast<size_t>(s.label)];
  for (int c = 0; c < data.class_count(); ++c)
    if (per_class[static_cast<size_t>(c)] == 0)
      throw DataError("class '" + data.classes[static_cast<size_t>(c)] + "' has no training samples");

  const Image& first = p.train.front().image;
  const int pixels = first.width() * first.height();
  if (config.input_neurons != 0 && config.input_neurons != pixels)
    throw ConfigError("input_neurons = " + std::to_string(config.input_neurons) + " but images have " +
                      std::to_string(pixels) + " pixels (set input_neurons = 0 to follow the data)");
  const int outputs = config.output_neurons == 0 ? data.class_count() : config.output_neurons;
  if (outputs != data.class_count())
    throw ConfigError("output_neurons = " + std::to_string(outputs) + " but the dataset has " +
                      std::to_string(data.class_count()) + " classes");

  p.model.mode = mode;
  p.model.input_width = first.width();
  p.model.input_height = first.height();
  p.model.class_names = data.classes;
  p.model.class_map.assign(static_cast<size_t>(outputs), -1);
  p.model.config = config;
  p.model.config.encoder.duration = config.lif.duration;
  p.model.seed = seed;
  return p;
}

std::vector<size_t> epoch_order(size_t n, uint64_t seed, int epoch) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  auto rng = derive_stream(seed ^ 0x5eed0f0dULL, static_cast<uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

uint64_t training_stream(int epoch, size_t sample) {
  return (static_cast<uint64_t>(epoch + 1) << 32) | static_cast<uint64_t>(sample);
}

}  // namespace detail

using detail::epoch_order;
using detail::Prepared;
using detail::training_stream;

namespace {

struct Calibration {
  std::vector<int> class_map;
  EpochRecord record;
};

Calibration calibrate(Model& model, const std::vector<Sample>& train, uint64_t seed, int epoch) {
  std::vector<int> winners, labels;
  for (size_t k = 0; k < train.size(); ++k) {
    const auto w = winner_neuron(model, train[k].image, seed, k);
    winners.push_back(w ? *w : -1);
    labels.push_back(train[k].label);
  }
  Calibration cal;
  cal.class_map = calibrate_class_map(winners, labels, model.output_count(), model.class_count());
  model.class_map = cal.class_map;

  const int classes = model.class_count();
  std::vector<int> correct(static_cast<size_t>(classes), 0), total(static_cast<size_t>(classes), 0);
  int all_correct = 0;
  for (size_t k = 0; k < train.size(); ++k) {
    const int label = labels[k];
    ++total[static_cast<size_t>(label)];
    if (winners[k] >= 0 && cal.class_map[static_cast<size_t>(winners[k])] == label) {
      ++correct[static_cast<size_t>(label)];
      ++all_correct;
    }
  }
  cal.record.epoch = epoch;
  for (int c = 0; c < classes; ++c)
    cal.record.per_class_accuracy.push_back(
        total[static_cast<size_t>(c)] ? static_cast<double>(correct[static_cast<size_t>(c)]) / total[static_cast<size_t>(c)] : 0.0);
  cal.record.overall = train.empty() ? 0.0 : static_cast<double>(all_correct) / static_cast<double>(train.size());
  cal.record.bijective = model.class_map_bijective();
  return cal;
}

void finish(Prepared& p, std::vector<EpochRecord>& history, uint64_t seed, int epochs) {
  for (auto& layer : p.model.layers) layer.round_to_float32();
  // Final calibration on the stored (float32) weights.
  auto cal = calibrate(p.model, p.train, seed, epochs);
  if (epochs == 0 || history.empty()) history.push_back(cal.record);
  else history.back() = cal.record;
}

}  // namespace

TrainResult train_unsupervised_single(const Dataset& data, const RunConfig& config, int epochs,
                                      uint64_t seed) {
  if (epochs < 0) throw DomainError("epochs must be >= 0");
  Prepared p = detail::prepare_training(data, config, ModelMode::kUnsupSingle, seed);
  auto init_rng = derive_stream(seed, 0xfeedULL);
  p.model.layers.push_back(random_synapses(p.model.input_count(), static_cast<int>(p.model.class_map.size()),
                                           config.stdp, init_rng));
  EncoderSpec spec = p.model.config.encoder;
  spec.seed = seed;

  TrainResult result;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (size_t k : epoch_order(p.train.size(), seed, epoch)) {
      const SpikeField field = encode_image(p.train[k].image, spec, training_stream(epoch, k));
      train_on_image_single(field, p.model.layers[0], p.model.config.lif, config.stdp);
    }
    result.history.push_back(calibrate(p.model, p.train, seed, epoch).record);
  }
  finish(p, result.history, seed, epochs);
  result.model = std::move(p.model);
  return result;
}

TrainResult train_unsupervised_bilayer(const Dataset& data, const RunConfig& config, int epochs,
                                       uint64_t seed) {
  if (epochs < 0) throw DomainError("epochs must be >= 0");
  if (config.lif.duration % config.bilayer.subsegments != 0)
    throw ConfigError("sedsi_t " + std::to_string(config.lif.duration) + " is not divisible into " +
                      std::to_string(config.bilayer.subsegments) + " subsegments");
  Prepared p = detail::prepare_training(data, config, ModelMode::kUnsupBilayer, seed);
  auto init_rng = derive_stream(seed, 0xfeedULL);
  const int hidden = config.bilayer.hidden_size;
  p.model.layers.push_back(random_synapses(p.model.input_count(), hidden, config.stdp, init_rng));
  p.model.layers.push_back(random_synapses(hidden, static_cast<int>(p.model.class_map.size()),
                                           scaled(config.stdp, config.bilayer.hidden_weight_scale),
                                           init_rng));
  EncoderSpec spec = p.model.config.encoder;
  spec.seed = seed;

  TrainResult result;
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (size_t k : epoch_order(p.train.size(), seed, epoch)) {
      const SpikeField field = encode_image(p.train[k].image, spec, training_stream(epoch, k));
      train_on_image_bilayer(field, p.model.layers[0], p.model.layers[1], p.model.config);
    }
    result.history.push_back(calibrate(p.model, p.train, seed, epoch).record);
  }
  finish(p, result.history, seed, epochs);
  result.model = std::move(p.model);
  return result;
}

}  // namespace snn
