#include "snn/supervised.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "snn/encoding.hpp"
#include "snn/error.hpp"
#include "training_common.hpp"

namespace snn {

double ResponseKernel::operator()(double delta) const {
  if (delta < 0.0) return 0.0;
  return std::exp(-delta / tau_s);
}

void ResponseKernel::validate() const {
  if (!(tau_s > 0.0) || !std::isfinite(tau_s)) throw ConfigError("tau_s must be a positive number");
}

Matrix filtered_inputs(const SpikeField& pre, const ResponseKernel& kernel) {
  kernel.validate();
  const TimeUnit duration = pre.duration();
  Matrix g = Matrix::Zero(pre.size(), duration + 1);
  // G(i, t) = G(i, t-1) * g(1) + [fired at t], the exponential kernel's recursion.
  const double decay = kernel(1.0);
  for (int i = 0; i < pre.size(); ++i) {
    const SpikeTrain& train = pre[i];
    double acc = 0.0;
    for (TimeUnit t = 0; t <= duration; ++t) {
      acc = acc * decay + (train.fired(t) ? 1.0 : 0.0);
      g(i, t) = acc;
    }
  }
  return g;
}

namespace {

void check_weights(const Matrix& weights, const SpikeField& pre) {
  if (weights.rows() != pre.size())
    throw DimensionError("weights have " + std::to_string(weights.rows()) +
                         " presynaptic rows, spike field has " + std::to_string(pre.size()) +
                         " neurons");
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": shape " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

Matrix huber_derivatives(const Matrix& actual, const Matrix& target, double delta) {
  Matrix d(actual.rows(), actual.cols());
  for (Eigen::Index k = 0; k < d.size(); ++k)
    d.data()[k] = huber_derivative(actual.data()[k] - target.data()[k], delta);
  return d;
}

}  // namespace

Matrix potential_trace(const Matrix& weights, const SpikeField& pre, const ResponseKernel& kernel) {
  check_weights(weights, pre);
  return weights.transpose() * filtered_inputs(pre, kernel);
}

double huber_derivative(double d, double delta) {
  if (std::abs(d) <= delta) return d;
  return d > 0.0 ? delta : -delta;
}

double huber_loss(const Matrix& actual, const Matrix& target, double delta) {
  check_same_shape(actual, target, "huber_loss");
  if (!(delta > 0.0)) throw DomainError("huber delta must be > 0");
  double total = 0.0;
  for (Eigen::Index k = 0; k < actual.size(); ++k) {
    const double d = std::abs(actual.data()[k] - target.data()[k]);
    total += d <= delta ? 0.5 * d * d : delta * d - 0.5 * delta * delta;
  }
  return total;
}

Matrix grad_weights(const Matrix& weights, const SpikeField& pre, const Matrix& target,
                    const ResponseKernel& kernel, double delta) {
  check_weights(weights, pre);
  const Matrix g = filtered_inputs(pre, kernel);
  const Matrix p = weights.transpose() * g;
  check_same_shape(p, target, "grad_weights");
  return g * huber_derivatives(p, target, delta).transpose();
}

AdamState::AdamState(Eigen::Index rows, Eigen::Index cols)
    : first_moment(Matrix::Zero(rows, cols)), second_moment(Matrix::Zero(rows, cols)) {}

double scheduled_lr(long steps_taken, const SupervisedParams& params) {
  return steps_taken < params.lr_switch_step() ? params.lr_ini : params.lr_mid;
}

double adam_step(AdamState& state, const Matrix& grads, Matrix& weights,
                 const SupervisedParams& params) {
  check_same_shape(grads, weights, "adam_step");
  if (state.first_moment.size() == 0) state = AdamState(weights.rows(), weights.cols());
  check_same_shape(state.first_moment, weights, "adam_step moments");
  if (!grads.allFinite()) throw NumericError("non-finite gradient");
  const double lr = scheduled_lr(state.step_count, params);
  ++state.step_count;
  const double b1 = params.beta1, b2 = params.beta2;
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * grads;
  state.second_moment = b2 * state.second_moment + (1.0 - b2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    const double m_hat = state.first_moment.data()[k] / c1;
    const double v_hat = state.second_moment.data()[k] / c2;
    weights.data()[k] -= lr * m_hat / (std::sqrt(v_hat) + params.epsilon);
  }
  return lr;
}

void GuidanceBundle::validate() const {
  if (traces.rows() < 1 || traces.cols() < 2) throw DataError("guidance bundle is empty");
  if (!traces.allFinite()) throw NumericError("guidance bundle contains non-finite values");
}

namespace {

/// Output-layer trace of an unsupervised model, with full spiking dynamics.
LayerTrace output_trace(const Model& model, const SpikeField& input) {
  if (model.layers.size() == 1) return simulate_layer(input, model.layers[0], model.config.lif);
  const LayerTrace hidden =
      simulate_layer(input, model.layers[0], model.config.lif, model.config.bilayer.hidden_inhibition);
  return simulate_layer(hidden.spikes, model.layers[1], model.config.lif);
}

}  // namespace

GuidanceBundle extract_guidance(const Model& model, const std::vector<Image>& representatives,
                                uint64_t seed) {
  if (model.mode == ModelMode::kSupervised)
    throw FormatError("guidance is extracted from an unsupervised model");
  if (static_cast<int>(representatives.size()) != model.class_count())
    throw DomainError("extract_guidance: " + std::to_string(representatives.size()) +
                      " representatives for " + std::to_string(model.class_count()) + " classes");
  EncoderSpec spec = model.config.encoder;
  spec.seed = seed;
  const TimeUnit duration = model.config.lif.duration;
  GuidanceBundle bundle;
  bundle.traces = Matrix::Zero(model.class_count(), duration + 1);
  for (int k = 0; k < model.class_count(); ++k) {
    const Image& image = representatives[static_cast<size_t>(k)];
    if (image.width() != model.input_width || image.height() != model.input_height)
      throw DimensionError("representative for class " + std::to_string(k) +
                           " does not match the model geometry");
    const LayerTrace trace = output_trace(model, encode_image(image, spec, static_cast<uint64_t>(k)));
    // A calibrated model names the class neuron; otherwise follow the neuron
    // that actually answered the representative.
    int neuron = model.class_map_bijective() ? model.neuron_for_class(k) : -1;
    if (neuron < 0) neuron = select_winner(trace.spikes).value_or(k < model.output_count() ? k : 0);
    for (TimeUnit t = 0; t <= duration; ++t)
      bundle.traces(k, t) = static_cast<float>(trace.potentials(neuron, t));
  }
  return bundle;
}

std::vector<Image> select_representatives(const Model& model, const Dataset& data, uint64_t seed) {
  const auto train = data.split(Split::kTrain);
  std::vector<Image> reps(static_cast<size_t>(data.class_count()));
  std::vector<int> state(static_cast<size_t>(data.class_count()), 0);  // 0 none, 1 fallback, 2 matched
  for (size_t k = 0; k < train.size(); ++k) {
    const int label = train[k].label;
    auto& s = state[static_cast<size_t>(label)];
    if (s == 2) continue;
    if (s == 0) {
      reps[static_cast<size_t>(label)] = train[k].image;
      s = 1;
    }
    if (classify(model, train[k].image, seed, k) == label) {
      reps[static_cast<size_t>(label)] = train[k].image;
      s = 2;
    }
  }
  for (int c = 0; c < data.class_count(); ++c)
    if (state[static_cast<size_t>(c)] == 0)
      throw DataError("class '" + data.classes[static_cast<size_t>(c)] + "' has no training samples");
  return reps;
}

void write_guidance_csv(std::ostream& out, const GuidanceBundle& bundle) {
  out << "class";
  for (TimeUnit t = 0; t <= bundle.duration(); ++t) out << ",t" << t;
  out << '\n';
  char buf[64];
  for (int k = 0; k < bundle.class_count(); ++k) {
    out << k;
    for (TimeUnit t = 0; t <= bundle.duration(); ++t) {
      auto res = std::to_chars(buf, buf + sizeof buf, bundle.traces(k, t));
      out << ',' << std::string_view(buf, static_cast<size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

GuidanceBundle read_guidance_csv(std::istream& in) {
  std::string line;
  std::vector<std::vector<double>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("class", 0) == 0) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw DataError("guidance line " + std::to_string(line_no) + ": bad value '" + cell + "'");
      if (first) {
        if (v != static_cast<double>(rows.size()))
          throw DataError("guidance line " + std::to_string(line_no) + ": expected class index " +
                          std::to_string(rows.size()));
        first = false;
      } else {
        values.push_back(v);
      }
    }
    if (!rows.empty() && values.size() != rows.front().size())
      throw DataError("guidance line " + std::to_string(line_no) + ": row length differs");
    rows.push_back(std::move(values));
  }
  GuidanceBundle bundle;
  if (rows.empty() || rows.front().size() < 2) throw DataError("guidance file has no traces");
  bundle.traces.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      bundle.traces(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  bundle.validate();
  return bundle;
}

Matrix target_matrix(const GuidanceBundle& guidance, int label, double p_rest) {
  if (label < 0 || label >= guidance.class_count())
    throw DimensionError("label " + std::to_string(label) + " outside the guidance bundle");
  Matrix target = Matrix::Constant(guidance.class_count(), guidance.traces.cols(), p_rest);
  target.row(label) = guidance.traces.row(label);
  return target;
}

SupervisedDecision classify_supervised(const Model& model, const Image& image, uint64_t seed,
                                       uint64_t image_index) {
  if (model.mode != ModelMode::kSupervised || model.layers.size() != 1)
    throw FormatError("classify_supervised needs a supervised model");
  if (image.width() != model.input_width || image.height() != model.input_height)
    throw DimensionError("image is " + std::to_string(image.width()) + "x" +
                         std::to_string(image.height()) + ", model expects " +
                         std::to_string(model.input_width) + "x" + std::to_string(model.input_height));
  GuidanceBundle guidance{model.guidance};
  EncoderSpec spec = model.config.encoder;
  spec.seed = seed;
  const ResponseKernel kernel{model.config.supervised.tau_s};
  const Matrix p =
      potential_trace(model.layers[0].weights(), encode_image(image, spec, image_index), kernel);
  SupervisedDecision decision;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < guidance.class_count(); ++k) {
    const double loss = huber_loss(p, target_matrix(guidance, k, model.config.lif.p_rest),
                                   model.config.supervised.huber_delta);
    decision.losses.push_back(loss);
    if (loss < best) {
      best = loss;
      decision.label = k;
    }
  }
  return decision;
}

namespace {

double accuracy(const Model& model, const std::vector<Sample>& samples, uint64_t seed,
                std::vector<double>* per_class) {
  std::vector<int> correct(static_cast<size_t>(model.class_count()), 0);
  std::vector<int> total(static_cast<size_t>(model.class_count()), 0);
  int all = 0;
  for (size_t k = 0; k < samples.size(); ++k) {
    const int label = samples[k].label;
    ++total[static_cast<size_t>(label)];
    if (classify_supervised(model, samples[k].image, seed, k).label == label) {
      ++correct[static_cast<size_t>(label)];
      ++all;
    }
  }
  if (per_class) {
    per_class->clear();
    for (size_t c = 0; c < correct.size(); ++c)
      per_class->push_back(total[c] ? static_cast<double>(correct[c]) / total[c] : 0.0);
  }
  return samples.empty() ? 0.0 : static_cast<double>(all) / static_cast<double>(samples.size());
}

EpochRecord score(const Model& model, const std::vector<Sample>& train,
                  const std::vector<Sample>& test, uint64_t seed, int epoch) {
  EpochRecord record;
  record.epoch = epoch;
  record.overall = accuracy(model, train, seed, &record.per_class_accuracy);
  record.bijective = model.class_map_bijective();
  if (!test.empty()) record.test_overall = accuracy(model, test, seed, nullptr);
  return record;
}

}  // namespace

TrainResult train_supervised(const Dataset& data, const GuidanceBundle& guidance,
                             const RunConfig& config, int epochs, uint64_t seed) {
  if (epochs < 0) throw DomainError("epochs must be >= 0");
  guidance.validate();
  if (guidance.class_count() != data.class_count())
    throw DataError("guidance has " + std::to_string(guidance.class_count()) +
                    " classes, dataset has " + std::to_string(data.class_count()));
  if (guidance.duration() != config.lif.duration)
    throw DataError("guidance traces cover " + std::to_string(guidance.duration()) +
                    " time units, sedsi_t is " + std::to_string(config.lif.duration));
  const ResponseKernel kernel{config.supervised.tau_s};
  kernel.validate();

  detail::Prepared p = detail::prepare_training(data, config, ModelMode::kSupervised, seed);
  const int m = p.model.input_count();
  const int n = data.class_count();
  const double inf = std::numeric_limits<double>::infinity();
  Matrix w(m, n);
  auto init_rng = derive_stream(seed, 0xfeedULL);
  const double s = config.supervised.init_scale;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    w.data()[k] = static_cast<float>(-s + 2.0 * s * uniform01(init_rng));
  p.model.layers.emplace_back(w, -inf, inf);
  for (int k = 0; k < n; ++k) p.model.class_map[static_cast<size_t>(k)] = k;
  p.model.guidance = guidance.traces.cast<float>().cast<double>();

  const auto test = data.split(Split::kTest);
  EncoderSpec spec = p.model.config.encoder;
  spec.seed = seed;
  std::vector<Matrix> targets;
  for (int k = 0; k < n; ++k) targets.push_back(target_matrix(guidance, k, config.lif.p_rest));

  TrainResult result;
  AdamState adam(m, n);
  Matrix grads = Matrix::Zero(m, n);
  int in_batch = 0;
  const int batch = config.supervised.batch_size;
  const long max_steps = config.supervised.max_steps;
  auto flush = [&] {
    if (in_batch == 0) return;
    grads /= static_cast<double>(in_batch);
    adam_step(adam, grads, w, config.supervised);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = static_cast<float>(w.data()[k]);
    grads.setZero();
    in_batch = 0;
  };
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    for (size_t k : detail::epoch_order(p.train.size(), seed, epoch)) {
      if (adam.step_count >= max_steps) break;
      const SpikeField field = encode_image(p.train[k].image, spec, detail::training_stream(epoch, k));
      const Matrix g = filtered_inputs(field, kernel);
      const Matrix pot = w.transpose() * g;
      grads += g * huber_derivatives(pot, targets[static_cast<size_t>(p.train[k].label)],
                                     config.supervised.huber_delta)
                       .transpose();
      if (++in_batch == batch) flush();
    }
    flush();
    p.model.layers[0] = SynapseMatrix(w, -inf, inf);
    result.history.push_back(score(p.model, p.train, test, seed, epoch));
  }
  p.model.layers[0] = SynapseMatrix(w, -inf, inf);
  if (epochs == 0) result.history.push_back(score(p.model, p.train, test, seed, 0));
  result.model = std::move(p.model);
  return result;
}

}  // namespace snn
