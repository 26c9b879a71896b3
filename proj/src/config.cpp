#include "snn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "snn/error.hpp"

namespace snn {

void StdpParams::validate() const {
  if (!(a_plus > 0.0) || !(a_minus > 0.0)) throw ConfigError("a_plus and a_minus must be > 0");
  if (!(tau_plus > 0.0) || !(tau_minus > 0.0))
    throw ConfigError("tau_plus and tau_minus must be > 0");
  if (t_fore < 1 || t_back < 1) throw ConfigError("t_fore and t_back must be >= 1");
  if (!(w_min < w_max)) throw ConfigError("w_min must be < w_max");
  if (silent_decay < 0.0) throw ConfigError("silent_decay must be >= 0");
  if (!(init_low <= init_high)) throw ConfigError("init_low must be <= init_high");
}

void BilayerParams::validate() const {
  if (hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (subsegments < 1) throw ConfigError("subsegments must be >= 1");
  if (correlation_halfwidth < 0) throw ConfigError("correlation_halfwidth must be >= 0");
  if (!(hidden_weight_scale > 0.0)) throw ConfigError("hidden_weight_scale must be > 0");
}

long SupervisedParams::lr_switch_step() const {
  return static_cast<long>(std::floor(lr_switch_fraction * static_cast<double>(max_steps)));
}

void SupervisedParams::validate() const {
  if (!(tau_s > 0.0)) throw ConfigError("tau_s must be > 0");
  if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("beta1 and beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(lr_ini > 0.0) || !(lr_mid > 0.0)) throw ConfigError("learning rates must be > 0");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (!(lr_switch_fraction >= 0.0 && lr_switch_fraction <= 1.0))
    throw ConfigError("lr_switch_fraction must lie in [0, 1]");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

void RunConfig::validate() const {
  if (input_neurons < 0 || output_neurons < 0)
    throw ConfigError("input_neurons and output_neurons must be >= 0");
  lif.validate();
  encoder.validate();
  stdp.validate();
  bilayer.validate();
  supervised.validate();
  if (unsup_epochs < 0 || sup_epochs < 0) throw ConfigError("epoch counts must be >= 0");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s(text);
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + std::string(key) + "': cannot parse '" + s + "' as a real number");
}

long parse_long(std::string_view key, std::string_view text) {
  long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("key '" + std::string(key) + "': cannot parse '" + std::string(text) +
                      "' as an integer");
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true/false, got '" +
                    std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct KeySpec {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename Field>
KeySpec real_key(const char* name, Field field) {
  return {name, [field](const RunConfig& c) { return format_double(field(const_cast<RunConfig&>(c))); },
          [name, field](RunConfig& c, std::string_view v) { field(c) = parse_double(name, v); }};
}

template <typename Field>
KeySpec int_key(const char* name, Field field) {
  return {name, [field](const RunConfig& c) { return std::to_string(field(const_cast<RunConfig&>(c))); },
          [name, field](RunConfig& c, std::string_view v) {
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_long(name, v));
          }};
}

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    // Network size and LIF dynamics.
    k.push_back(int_key("input_neurons", [](RunConfig& c) -> int& { return c.input_neurons; }));
    k.push_back(int_key("output_neurons", [](RunConfig& c) -> int& { return c.output_neurons; }));
    k.push_back({"sedsi_t", [](const RunConfig& c) { return std::to_string(c.lif.duration); },
                 [](RunConfig& c, std::string_view v) {
                   c.lif.duration = static_cast<TimeUnit>(parse_long("sedsi_t", v));
                   c.encoder.duration = c.lif.duration;
                 }});
    k.push_back(int_key("t_ref", [](RunConfig& c) -> TimeUnit& { return c.lif.t_ref; }));
    k.push_back(real_key("p_rest", [](RunConfig& c) -> double& { return c.lif.p_rest; }));
    k.push_back(real_key("p_reset", [](RunConfig& c) -> double& { return c.lif.p_reset; }));
    k.push_back(real_key("p_th", [](RunConfig& c) -> double& { return c.lif.p_th; }));
    k.push_back(real_key("leak_d", [](RunConfig& c) -> double& { return c.lif.leak_d; }));
    k.push_back({"p_inhibit", [](const RunConfig& c) { return format_double(c.lif.p_inhibit); },
                 [](RunConfig& c, std::string_view v) {
                   c.lif.p_inhibit = parse_double("p_inhibit", v);
                   c.lif.inhibit_floor = c.lif.p_inhibit;
                 }});
    k.push_back(real_key("inhibit_floor", [](RunConfig& c) -> double& { return c.lif.inhibit_floor; }));
    k.push_back({"leak_mode",
                 [](const RunConfig& c) {
                   return std::string(c.lif.leak_mode == LeakMode::kConstant ? "constant" : "exponential");
                 },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "constant") c.lif.leak_mode = LeakMode::kConstant;
                   else if (v == "exponential") c.lif.leak_mode = LeakMode::kExponential;
                   else throw ConfigError("key 'leak_mode': expected constant or exponential");
                 }});
    k.push_back(real_key("tau_m", [](RunConfig& c) -> double& { return c.lif.tau_m; }));
    k.push_back(real_key("r_m", [](RunConfig& c) -> double& { return c.lif.r_m; }));
    // Encoder.
    k.push_back({"encoder",
                 [](const RunConfig& c) {
                   return std::string(c.encoder.method == EncoderMethod::kRandom ? "random" : "deterministic");
                 },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "random") c.encoder.method = EncoderMethod::kRandom;
                   else if (v == "deterministic") c.encoder.method = EncoderMethod::kDeterministic;
                   else throw ConfigError("key 'encoder': expected random or deterministic");
                 }});
    k.push_back(real_key("f_min", [](RunConfig& c) -> double& { return c.encoder.f_min; }));
    k.push_back(real_key("f_max", [](RunConfig& c) -> double& { return c.encoder.f_max; }));
    // STDP.
    k.push_back(real_key("a_plus", [](RunConfig& c) -> double& { return c.stdp.a_plus; }));
    k.push_back(real_key("a_minus", [](RunConfig& c) -> double& { return c.stdp.a_minus; }));
    k.push_back(real_key("tau_plus", [](RunConfig& c) -> double& { return c.stdp.tau_plus; }));
    k.push_back(real_key("tau_minus", [](RunConfig& c) -> double& { return c.stdp.tau_minus; }));
    k.push_back(int_key("t_fore", [](RunConfig& c) -> TimeUnit& { return c.stdp.t_fore; }));
    k.push_back(int_key("t_back", [](RunConfig& c) -> TimeUnit& { return c.stdp.t_back; }));
    k.push_back(real_key("silent_decay", [](RunConfig& c) -> double& { return c.stdp.silent_decay; }));
    k.push_back(real_key("w_min", [](RunConfig& c) -> double& { return c.stdp.w_min; }));
    k.push_back(real_key("w_max", [](RunConfig& c) -> double& { return c.stdp.w_max; }));
    k.push_back({"stdp_magnitude",
                 [](const RunConfig& c) {
                   return std::string(c.stdp.magnitude == StdpMagnitude::kExponential ? "exponential" : "constant");
                 },
                 [](RunConfig& c, std::string_view v) {
                   if (v == "exponential") c.stdp.magnitude = StdpMagnitude::kExponential;
                   else if (v == "constant") c.stdp.magnitude = StdpMagnitude::kConstant;
                   else throw ConfigError("key 'stdp_magnitude': expected exponential or constant");
                 }});
    k.push_back(real_key("init_low", [](RunConfig& c) -> double& { return c.stdp.init_low; }));
    k.push_back(real_key("init_high", [](RunConfig& c) -> double& { return c.stdp.init_high; }));
    // Bilayer.
    k.push_back(int_key("hidden_size", [](RunConfig& c) -> int& { return c.bilayer.hidden_size; }));
    k.push_back(int_key("subsegments", [](RunConfig& c) -> int& { return c.bilayer.subsegments; }));
    k.push_back(int_key("correlation_halfwidth",
                        [](RunConfig& c) -> TimeUnit& { return c.bilayer.correlation_halfwidth; }));
    k.push_back({"hidden_inhibition",
                 [](const RunConfig& c) { return std::string(c.bilayer.hidden_inhibition ? "true" : "false"); },
                 [](RunConfig& c, std::string_view v) {
                   c.bilayer.hidden_inhibition = parse_bool("hidden_inhibition", v);
                 }});
    k.push_back(real_key("hidden_weight_scale",
                         [](RunConfig& c) -> double& { return c.bilayer.hidden_weight_scale; }));
    // Supervised training.
    k.push_back(real_key("tau_s", [](RunConfig& c) -> double& { return c.supervised.tau_s; }));
    k.push_back(real_key("huber_delta", [](RunConfig& c) -> double& { return c.supervised.huber_delta; }));
    k.push_back(real_key("beta1", [](RunConfig& c) -> double& { return c.supervised.beta1; }));
    k.push_back(real_key("beta2", [](RunConfig& c) -> double& { return c.supervised.beta2; }));
    k.push_back(real_key("epsilon", [](RunConfig& c) -> double& { return c.supervised.epsilon; }));
    k.push_back(real_key("lr_ini", [](RunConfig& c) -> double& { return c.supervised.lr_ini; }));
    k.push_back(real_key("lr_mid", [](RunConfig& c) -> double& { return c.supervised.lr_mid; }));
    k.push_back(int_key("max_steps", [](RunConfig& c) -> long& { return c.supervised.max_steps; }));
    k.push_back(real_key("lr_switch_fraction",
                         [](RunConfig& c) -> double& { return c.supervised.lr_switch_fraction; }));
    k.push_back(int_key("batch_size", [](RunConfig& c) -> int& { return c.supervised.batch_size; }));
    k.push_back(real_key("init_scale", [](RunConfig& c) -> double& { return c.supervised.init_scale; }));
    // Schedules.
    k.push_back(int_key("unsup_epochs", [](RunConfig& c) -> int& { return c.unsup_epochs; }));
    k.push_back(int_key("sup_epochs", [](RunConfig& c) -> int& { return c.sup_epochs; }));
    return k;
  }();
  return keys;
}

const KeySpec& find_key(std::string_view key) {
  for (const auto& spec : registry())
    if (key == spec.name) return spec;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void set_config_value(RunConfig& config, std::string_view key, std::string_view value) {
  find_key(key).set(config, value);
}

std::string get_config_value(const RunConfig& config, std::string_view key) {
  return find_key(key).get(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& spec : registry()) out.emplace_back(spec.name);
  return out;
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : registry()) out.emplace_back(spec.name, spec.get(config));
  return out;
}

RunConfig parse_config_text(std::string_view text) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::vector<std::pair<std::string, int>> set_on_line;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      set_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    set_on_line.emplace_back(key, line_no);
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    // Blame the latest line that set a key named in the violated bound.
    const std::string what = e.what();
    int blamed = 0;
    for (const auto& [key, line] : set_on_line)
      if (what.find(key) != std::string::npos) blamed = std::max(blamed, line);
    if (blamed == 0 && !set_on_line.empty()) blamed = set_on_line.back().second;
    throw ConfigError("line " + std::to_string(blamed) + ": " + what);
  }
  return config;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace snn
