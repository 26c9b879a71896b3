// Command-line front end. Everything goes through the C API in snn/snn.h.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "snn/snn.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitModel = 3;

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(snn_status s) {
  switch (s) {
    case SNN_OK: return 0;
    case SNN_ERR_USAGE: return kExitUsage;
    case SNN_ERR_DATA: return kExitData;
    default: return kExitModel;
  }
}

void check(snn_status s, const std::string& what) {
  if (s == SNN_OK) return;
  throw Failure{exit_code_for(s), what + ": " + snn_last_error()};
}

void usage_error(const std::string& message) { throw Failure{kExitUsage, message}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<snn_config, Deleter<snn_config, snn_config_free>>;
using DatasetPtr = std::unique_ptr<snn_dataset, Deleter<snn_dataset, snn_dataset_free>>;
using ModelPtr = std::unique_ptr<snn_model, Deleter<snn_model, snn_model_free>>;
using GuidancePtr = std::unique_ptr<snn_guidance, Deleter<snn_guidance, snn_guidance_free>>;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  uint64_t seed = 1;
  std::string out;
  std::string model;
  std::string data;
  std::string guidance;
  std::string snr = "10,5,0,-5,inf";
  int epochs = -1;
  int jobs = 1;
  bool force = false;

  std::string image;
  std::string input;
  std::string weights;
  std::string history;
  std::string split = "test";
  std::string kind = "speckle";
  double test_fraction = 0.3;
  int classes = 3;
  int per_class = -1;
  int test_per_class = -1;
  int size = -1;
};

ConfigPtr make_config(const Options& o) {
  snn_config* raw = nullptr;
  if (o.config.empty())
    check(snn_config_new(&raw), "config");
  else
    check(snn_config_load(o.config.c_str(), &raw), o.config);
  ConfigPtr cfg(raw);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) usage_error("--set expects key=value, got '" + kv + "'");
    check(snn_config_set(cfg.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()),
          "--set " + kv);
  }
  return cfg;
}

int config_int(const snn_config* cfg, const char* key) {
  char buf[64];
  check(snn_config_get(cfg, key, buf, sizeof buf, nullptr), key);
  return std::stoi(buf);
}

DatasetPtr load_data(const Options& o) {
  if (o.data.empty()) usage_error("--data is required");
  snn_dataset* raw = nullptr;
  check(snn_dataset_load(o.data.c_str(), o.test_fraction, o.seed, &raw), o.data);
  return DatasetPtr(raw);
}

ModelPtr load_model(const Options& o) {
  if (o.model.empty()) usage_error("--model is required");
  snn_model* raw = nullptr;
  check(snn_model_load(o.model.c_str(), &raw), o.model);
  return ModelPtr(raw);
}

// Existing outputs are only replaced with --force.
void claim_output(const std::string& path, const Options& o) {
  if (path.empty()) usage_error("--out is required");
  std::error_code ec;
  if (fs::exists(path, ec) && !o.force)
    usage_error("refusing to overwrite " + path + " (pass --force)");
}

std::string history_path(const Options& o) {
  if (!o.history.empty()) return o.history;
  fs::path p(o.out);
  p.replace_extension(".history.csv");
  return p.string();
}

std::vector<double> parse_snr_list(const std::string& text) {
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "+inf") {
      levels.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      levels.push_back(v);
    } catch (const std::exception&) {
      usage_error("--snr: bad level '" + item + "'");
    }
  }
  if (levels.empty()) usage_error("--snr needs at least one level");
  return levels;
}

int epochs_or(const Options& o, const snn_config* cfg, const char* key) {
  if (o.epochs >= 0) return o.epochs;
  return config_int(cfg, key);
}

void cmd_gen_data(const Options& o) {
  claim_output(o.out, o);
  const bool fixture = o.kind == "orthogonal";
  const int per_class = o.per_class >= 0 ? o.per_class : (fixture ? 30 : 50);
  const int test_per_class = o.test_per_class >= 0 ? o.test_per_class : (fixture ? 10 : 20);
  const int size = o.size >= 0 ? o.size : (fixture ? 32 : 64);
  if (fixture)
    check(snn_dataset_generate_fixture(o.out.c_str(), o.classes, per_class, test_per_class, size,
                                       o.seed, nullptr),
          "gen-data");
  else
    check(snn_dataset_generate(o.out.c_str(), o.classes, per_class, test_per_class, size, o.seed,
                               nullptr),
          "gen-data");
  std::cout << "wrote " << o.classes * (per_class + test_per_class) << " images to " << o.out << "\n";
}

void cmd_encode(const Options& o) {
  if (o.image.empty()) usage_error("--image is required");
  claim_output(o.out, o);
  const auto cfg = make_config(o);
  check(snn_encode_image(o.image.c_str(), cfg.get(), o.seed, o.out.c_str()), o.image);
}

void cmd_trace(const Options& o) {
  if (o.input.empty()) usage_error("--input is required");
  const std::string& weights = o.weights.empty() ? o.model : o.weights;
  if (weights.empty()) usage_error("--weights or --model is required");
  claim_output(o.out, o);
  const auto cfg = make_config(o);
  check(snn_trace(o.input.c_str(), weights.c_str(), cfg.get(), o.seed, o.out.c_str()), o.input);
}

void cmd_train_unsup(const Options& o, snn_train_mode mode) {
  claim_output(o.out, o);
  const std::string hist = history_path(o);
  claim_output(hist, o);
  const auto cfg = make_config(o);
  const auto data = load_data(o);
  snn_model* raw = nullptr;
  check(snn_train_unsupervised(cfg.get(), data.get(), mode, epochs_or(o, cfg.get(), "unsup_epochs"),
                               o.seed, hist.c_str(), &raw),
        "training");
  ModelPtr model(raw);
  check(snn_model_save(model.get(), o.out.c_str()), o.out);
  std::cout << "model: " << o.out << "\nhistory: " << hist << "\n";
}

void cmd_extract_guidance(const Options& o) {
  claim_output(o.out, o);
  const auto model = load_model(o);
  const auto data = load_data(o);
  snn_guidance* raw = nullptr;
  check(snn_guidance_extract(model.get(), data.get(), o.seed, &raw), o.model);
  GuidancePtr g(raw);
  check(snn_guidance_save(g.get(), o.out.c_str()), o.out);
}

void cmd_train_sup(const Options& o) {
  if (o.guidance.empty()) usage_error("--guidance is required");
  claim_output(o.out, o);
  const std::string hist = history_path(o);
  claim_output(hist, o);
  const auto cfg = make_config(o);
  const auto data = load_data(o);
  snn_guidance* graw = nullptr;
  check(snn_guidance_load(o.guidance.c_str(), &graw), o.guidance);
  GuidancePtr g(graw);
  snn_model* raw = nullptr;
  check(snn_train_supervised(cfg.get(), data.get(), g.get(), epochs_or(o, cfg.get(), "sup_epochs"),
                             o.seed, hist.c_str(), &raw),
        "training");
  ModelPtr model(raw);
  check(snn_model_save(model.get(), o.out.c_str()), o.out);
  std::cout << "model: " << o.out << "\nhistory: " << hist << "\n";
}

void cmd_classify(const Options& o) {
  if (o.image.empty()) usage_error("--image is required");
  if (!o.out.empty()) claim_output(o.out, o);
  const auto model = load_model(o);
  int label = -1;
  check(snn_classify_file(model.get(), o.image.c_str(), o.seed, &label), o.image);
  char name[256] = "";
  if (label >= 0) check(snn_model_class_name(model.get(), label, name, sizeof name), o.model);
  std::ostringstream line;
  line << "image,label,class\n" << o.image << ',' << label << ',' << name << '\n';
  if (o.out.empty()) {
    std::cout << line.str();
  } else {
    FILE* f = std::fopen(o.out.c_str(), "w");
    if (!f) throw Failure{kExitData, "cannot write " + o.out};
    std::fputs(line.str().c_str(), f);
    std::fclose(f);
  }
}

snn_split parse_split(const std::string& s) {
  if (s == "train") return SNN_SPLIT_TRAIN;
  if (s == "test") return SNN_SPLIT_TEST;
  if (s == "all") return SNN_SPLIT_ALL;
  usage_error("--split must be train, test or all");
  return SNN_SPLIT_TEST;
}

void cmd_eval(const Options& o) {
  claim_output(o.out, o);
  const auto model = load_model(o);
  const auto data = load_data(o);
  double acc = 0.0;
  check(snn_evaluate(model.get(), data.get(), parse_split(o.split), o.seed, o.jobs, o.out.c_str(), &acc),
        o.data);
  std::cout << "overall: " << acc << "\n";
}

void cmd_noise_sweep(const Options& o) {
  const auto levels = parse_snr_list(o.snr);
  claim_output(o.out, o);
  const auto model = load_model(o);
  const auto data = load_data(o);
  std::vector<double> acc(levels.size());
  check(snn_noise_sweep(model.get(), data.get(), levels.data(), levels.size(), o.seed, o.jobs,
                        o.out.c_str(), acc.data()),
        o.data);
  for (size_t k = 0; k < levels.size(); ++k)
    std::cout << "snr " << levels[k] << " dB: " << acc[k] << "\n";
}

void cmd_export_features(const Options& o) {
  if (o.out.empty()) usage_error("--out (file prefix) is required");
  const auto model = load_model(o);
  if (!o.force) {
    const fs::path first = o.out + "_neuron0.pgm";
    std::error_code ec;
    if (fs::exists(first, ec)) usage_error("refusing to overwrite " + first.string() + " (pass --force)");
  }
  int written = 0;
  check(snn_export_features(model.get(), o.out.c_str(), &written), o.model);
  std::cout << "wrote " << written << " feature maps\n";
}

void cmd_stats(const Options& o) {
  const auto model = load_model(o);
  snn_stats st{};
  check(snn_model_stats(model.get(), &st), o.model);
  std::ostringstream topo;
  for (int k = 0; k <= st.layer_count && k < 8; ++k) topo << (k ? "x" : "") << st.topology[k];
  std::cout << "topology: " << topo.str() << "\n"
            << "parameters: " << st.parameters << "\n"
            << "bytes: " << st.bytes << "\n"
            << "macs_per_tu: " << st.macs_per_tu << "\n"
            << "macs_per_image: " << st.macs_per_image << "\n";
  if (!o.out.empty()) {
    claim_output(o.out, o);
    FILE* f = std::fopen(o.out.c_str(), "w");
    if (!f) throw Failure{kExitData, "cannot write " + o.out};
    std::fprintf(f,
                 "{\"topology\":\"%s\",\"parameters\":%lld,\"bytes\":%lld,\"macs_per_tu\":%lld,"
                 "\"macs_per_image\":%lld}\n",
                 topo.str().c_str(), static_cast<long long>(st.parameters),
                 static_cast<long long>(st.bytes), static_cast<long long>(st.macs_per_tu),
                 static_cast<long long>(st.macs_per_image));
    std::fclose(f);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking neural network image classifier"};
  app.name("snn");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "Config file (key = value lines)");
  app.add_option("--set", o.overrides, "Override a config entry, key=value (repeatable)");
  app.add_option("--seed", o.seed, "Seed for every randomized step");
  app.add_option("--out", o.out, "Output file, directory or prefix");
  app.add_flag("--force", o.force, "Overwrite existing outputs");
  app.add_option("--jobs", o.jobs, "Evaluation threads")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic dataset tree");
  gen->add_option("--kind", o.kind, "speckle or orthogonal")->check(CLI::IsMember({"speckle", "orthogonal"}));
  gen->add_option("--classes", o.classes, "Number of classes");
  gen->add_option("--per-class", o.per_class, "Training images per class");
  gen->add_option("--test-per-class", o.test_per_class, "Test images per class");
  gen->add_option("--size", o.size, "Image side in pixels");

  auto* enc = app.add_subcommand("encode", "Encode one image into a spike-field file");
  enc->add_option("--image", o.image, "PGM or PNG image");

  auto* trace = app.add_subcommand("trace", "Potential trace of an output layer as CSV");
  trace->add_option("--input", o.input, "Spike-field file or image");
  auto* w_opt = trace->add_option("--weights", o.weights, "Weight CSV (inputs x neurons) or checkpoint");
  auto* m_opt = trace->add_option("--model", o.model, "Checkpoint");
  w_opt->excludes(m_opt);

  auto* tu = app.add_subcommand("train-unsup", "Single-layer STDP training");
  auto* tb = app.add_subcommand("train-bilayer", "Two-layer STDP training");
  auto* ts = app.add_subcommand("train-sup", "Supervised training against guidance traces");
  for (auto* sub : {tu, tb, ts}) {
    sub->add_option("--data", o.data, "Dataset root");
    sub->add_option("--epochs", o.epochs, "Epoch count (defaults to the config)");
    sub->add_option("--history", o.history, "Per-epoch accuracy CSV (default: --out with extension .history.csv)");
    sub->add_option("--test-fraction", o.test_fraction, "Test share for trees without train/test");
  }
  ts->add_option("--guidance", o.guidance, "Guidance CSV");

  auto* eg = app.add_subcommand("extract-guidance", "Guidance traces from an unsupervised model");
  eg->add_option("--model", o.model, "Unsupervised checkpoint");
  eg->add_option("--data", o.data, "Dataset root");
  eg->add_option("--test-fraction", o.test_fraction, "Test share for trees without train/test");

  auto* cl = app.add_subcommand("classify", "Classify one image");
  cl->add_option("--model", o.model, "Checkpoint");
  cl->add_option("--image", o.image, "PGM or PNG image");

  auto* ev = app.add_subcommand("eval", "Confusion matrix and accuracy report");
  auto* ns = app.add_subcommand("noise-sweep", "Accuracy under additive white noise");
  for (auto* sub : {ev, ns}) {
    sub->add_option("--model", o.model, "Checkpoint");
    sub->add_option("--data", o.data, "Dataset root");
    sub->add_option("--test-fraction", o.test_fraction, "Test share for trees without train/test");
  }
  ev->add_option("--split", o.split, "train, test or all");
  ns->add_option("--snr", o.snr, "Comma-separated SNR levels in dB, inf for clean");

  auto* ef = app.add_subcommand("export-features", "Write one PGM per output neuron");
  ef->add_option("--model", o.model, "Checkpoint");

  auto* st = app.add_subcommand("stats", "Parameter and compute counts");
  st->add_option("--model", o.model, "Checkpoint");

  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg.rfind("-", 0) == 0) {
      if (arg.find('=') == std::string::npos && arg != "--force" && arg != "-h" && arg != "--help") ++k;
      continue;
    }
    bool known = false;
    for (const auto* sub : app.get_subcommands([](CLI::App*) { return true; }))
      known = known || sub->get_name() == arg;
    if (!known) {
      std::cerr << "snn: unknown subcommand '" << arg << "'\n\n" << app.help();
      return kExitUsage;
    }
    break;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "snn: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) cmd_gen_data(o);
    else if (enc->parsed()) cmd_encode(o);
    else if (trace->parsed()) cmd_trace(o);
    else if (tu->parsed()) cmd_train_unsup(o, SNN_TRAIN_UNSUP_SINGLE);
    else if (tb->parsed()) cmd_train_unsup(o, SNN_TRAIN_UNSUP_BILAYER);
    else if (eg->parsed()) cmd_extract_guidance(o);
    else if (ts->parsed()) cmd_train_sup(o);
    else if (cl->parsed()) cmd_classify(o);
    else if (ev->parsed()) cmd_eval(o);
    else if (ns->parsed()) cmd_noise_sweep(o);
    else if (ef->parsed()) cmd_export_features(o);
    else if (st->parsed()) cmd_stats(o);
  } catch (const Failure& f) {
    std::cerr << "snn: " << f.message << "\n";
    if (f.code == kExitUsage) std::cerr << "run 'snn --help' for usage\n";
    return f.code;
  }
  return 0;
}
