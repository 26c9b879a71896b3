#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "snn/encoding.hpp"
#include "snn/neuron.hpp"

namespace snn {

enum class StdpMagnitude { kExponential, kConstant };

struct StdpParams {
  double a_plus = 0.8;
  double a_minus = 0.3;
  double tau_plus = 5.0;
  double tau_minus = 5.0;
  TimeUnit t_fore = 7;
  TimeUnit t_back = 7;
  double silent_decay = 0.2;
  double w_min = -1.2;
  double w_max = 1.4;
  StdpMagnitude magnitude = StdpMagnitude::kExponential;
  // Initial weights are uniform in [init_low, init_high] * w_max.
  double init_low = 0.6;
  double init_high = 0.8;

  void validate() const;
};

struct BilayerParams {
  int hidden_size = 100;
  int subsegments = 10;
  TimeUnit correlation_halfwidth = 3;  // closed window [TUmax - h, TUmax + h]
  bool hidden_inhibition = true;
  double hidden_weight_scale = 100.0;  // multiplies the hidden->output bounds and rates

  void validate() const;
};

struct SupervisedParams {
  double tau_s = 10.0;  // response kernel time constant
  double huber_delta = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double lr_ini = 1e-3;
  double lr_mid = 1e-4;
  long max_steps = 30000;
  double lr_switch_fraction = 0.6;
  int batch_size = 1;
  double init_scale = 0.01;  // initial weights uniform in [-s, s]

  long lr_switch_step() const;
  void validate() const;
};

struct RunConfig {
  int input_neurons = 16384;  // 0: take from the dataset
  int output_neurons = 3;     // 0: take from the dataset
  LifParams lif;
  EncoderSpec encoder;
  StdpParams stdp;
  BilayerParams bilayer;
  SupervisedParams supervised;
  int unsup_epochs = 20;
  int sup_epochs = 25;

  void validate() const;
};

/// Sets one documented key from its textual value. Throws ConfigError for
/// unknown keys and unparseable values.
void set_config_value(RunConfig& config, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& config, std::string_view key);
/// All documented keys in a stable order.
std::vector<std::string> config_keys();
/// Every key with its current value, round-trippable through set_config_value.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config);

/// Parses `key = value` lines with `#` comments on top of the defaults.
/// Errors name the line number.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

}  // namespace snn
