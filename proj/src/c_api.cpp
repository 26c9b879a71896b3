#include "snn/snn.h"

#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <sstream>
#include <string>

#include "snn/config.hpp"
#include "snn/dataset.hpp"
#include "snn/encoding.hpp"
#include "snn/error.hpp"
#include "snn/evaluation.hpp"
#include "snn/image_io.hpp"
#include "snn/model_io.hpp"
#include "snn/stdp.hpp"
#include "snn/supervised.hpp"

struct snn_config {
  snn::RunConfig value;
};
struct snn_dataset {
  snn::Dataset value;
};
struct snn_model {
  snn::Model value;
};
struct snn_guidance {
  snn::GuidanceBundle value;
};

namespace {

thread_local std::string g_last_error;

snn_status status_for(snn::ErrorKind kind) {
  switch (kind) {
    case snn::ErrorKind::kUsage: return SNN_ERR_USAGE;
    case snn::ErrorKind::kData: return SNN_ERR_DATA;
    case snn::ErrorKind::kNumeric: return SNN_ERR_NUMERIC;
    case snn::ErrorKind::kModel: return SNN_ERR_MODEL;
  }
  return SNN_ERR_INTERNAL;
}

template <typename Fn>
snn_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return SNN_OK;
  } catch (const snn::Error& e) {
    g_last_error = e.what();
    return status_for(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  }
  return SNN_ERR_INTERNAL;
}

void require(const void* p, const char* name) {
  if (!p) throw snn::DomainError(std::string(name) + " must not be NULL");
}

std::vector<snn::Sample> pick(const snn::Dataset& data, snn_split split) {
  switch (split) {
    case SNN_SPLIT_TRAIN: return data.split(snn::Split::kTrain);
    case SNN_SPLIT_TEST: return data.split(snn::Split::kTest);
    case SNN_SPLIT_ALL: return data.samples;
  }
  throw snn::DomainError("unknown split");
}

std::ofstream open_out(const char* path) {
  std::ofstream out(path);
  if (!out) throw snn::DataError(std::string("cannot write ") + path);
  return out;
}

void write_history(const char* path, const snn::TrainResult& result) {
  if (!path) return;
  auto out = open_out(path);
  snn::write_history_csv(out, result.history, result.model.class_names);
}

snn::SynapseMatrix read_weight_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw snn::DataError("cannot open weights " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw snn::DataError(path + " line " + std::to_string(line_no) + ": bad weight '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw snn::DataError(path + " line " + std::to_string(line_no) + ": row length differs");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw snn::DataError(path + " holds no weights");
  snn::Matrix w(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  const double inf = std::numeric_limits<double>::infinity();
  return snn::SynapseMatrix(w, -inf, inf);
}

bool has_prefix(const std::string& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw snn::DataError("cannot open " + path);
  std::string head(magic.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  return in.gcount() == static_cast<std::streamsize>(magic.size()) && head == magic;
}

}  // namespace

extern "C" {

const char* snn_last_error(void) { return g_last_error.c_str(); }

const char* snn_status_name(snn_status status) {
  switch (status) {
    case SNN_OK: return "ok";
    case SNN_ERR_USAGE: return "usage error";
    case SNN_ERR_DATA: return "data error";
    case SNN_ERR_NUMERIC: return "numeric error";
    case SNN_ERR_MODEL: return "model error";
    case SNN_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

snn_status snn_config_new(snn_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new snn_config{};
  });
}

snn_status snn_config_load(const char* path, snn_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new snn_config{snn::parse_config(path)};
  });
}

snn_status snn_config_set(snn_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    snn::RunConfig updated = config->value;
    snn::set_config_value(updated, key, value);
    updated.validate();
    config->value = updated;
  });
}

snn_status snn_config_get(const snn_config* config, const char* key, char* buf, size_t len,
                          size_t* needed) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    const std::string v = snn::get_config_value(config->value, key);
    if (needed) *needed = v.size() + 1;
    if (buf && len > 0) {
      const size_t n = std::min(len - 1, v.size());
      std::memcpy(buf, v.data(), n);
      buf[n] = '\0';
    }
  });
}

void snn_config_free(snn_config* config) { delete config; }

snn_status snn_dataset_load(const char* root, double test_fraction, uint64_t seed,
                            snn_dataset** out) {
  return guarded([&] {
    require(root, "root");
    require(out, "out");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
      throw snn::DomainError("test fraction must be in [0, 1)");
    *out = new snn_dataset{snn::load_dataset(root, snn::SplitSpec{test_fraction, seed})};
  });
}

snn_status snn_dataset_generate(const char* root, int class_count, int per_class,
                                int test_per_class, int size, uint64_t seed, snn_dataset** out) {
  return guarded([&] {
    snn::SyntheticSpec spec{class_count, per_class, test_per_class, size, seed};
    snn::Dataset ds = root ? snn::generate_synthetic(root, spec) : snn::synthesize_dataset(spec);
    if (out) *out = new snn_dataset{std::move(ds)};
  });
}

snn_status snn_dataset_generate_fixture(const char* root, int class_count, int per_class,
                                        int test_per_class, int size, uint64_t seed,
                                        snn_dataset** out) {
  return guarded([&] {
    snn::OrthogonalSpec spec;
    spec.class_count = class_count;
    spec.per_class = per_class;
    spec.test_per_class = test_per_class;
    spec.size = size;
    spec.seed = seed;
    snn::Dataset ds = snn::orthogonal_fixture(spec);
    if (root) snn::write_dataset(root, ds, "orthogonal blob fixture seed=" + std::to_string(seed));
    if (out) *out = new snn_dataset{std::move(ds)};
  });
}

int snn_dataset_class_count(const snn_dataset* data) { return data ? data->value.class_count() : 0; }

int snn_dataset_size(const snn_dataset* data, snn_split split) {
  if (!data) return 0;
  try {
    return static_cast<int>(pick(data->value, split).size());
  } catch (...) {
    return 0;
  }
}

void snn_dataset_free(snn_dataset* data) { delete data; }

snn_status snn_encode_image(const char* image_path, const snn_config* config, uint64_t seed,
                            const char* out_path) {
  return guarded([&] {
    require(image_path, "image path");
    require(config, "config");
    require(out_path, "output path");
    const snn::Image image = snn::load_image(image_path);
    snn::EncoderSpec spec = config->value.encoder;
    spec.seed = seed;
    const snn::SpikeField field = snn::encode_image(image, spec, 0);
    auto out = open_out(out_path);
    snn::write_spike_field(out, field);
  });
}

snn_status snn_trace(const char* input_path, const char* weights_path, const snn_config* config,
                     uint64_t seed, const char* out_csv) {
  return guarded([&] {
    require(input_path, "input path");
    require(weights_path, "weights path");
    require(config, "config");
    require(out_csv, "output path");
    const bool checkpoint = has_prefix(weights_path, "snncp ");
    snn::Model model;
    if (checkpoint) {
      model = snn::load_checkpoint(weights_path);
      if (model.mode == snn::ModelMode::kSupervised)
        throw snn::FormatError(std::string(weights_path) + ": trace needs an unsupervised checkpoint or a weight CSV");
    }
    const snn::RunConfig& cfg = checkpoint ? model.config : config->value;

    snn::SpikeField input;
    if (has_prefix(input_path, "spikefield ")) {
      std::ifstream in(input_path);
      input = snn::read_spike_field(in);
    } else {
      snn::EncoderSpec spec = cfg.encoder;
      spec.seed = seed;
      input = snn::encode_image(snn::load_image(input_path), spec, 0);
    }

    snn::LayerTrace trace;
    if (checkpoint) {
      if (input.size() != model.input_count())
        throw snn::DimensionError(std::string(input_path) + " does not match the checkpoint's input layer");
      if (model.layers.size() == 1) {
        trace = snn::simulate_layer(input, model.layers[0], cfg.lif);
      } else {
        const auto hidden =
            snn::simulate_layer(input, model.layers[0], cfg.lif, cfg.bilayer.hidden_inhibition);
        trace = snn::simulate_layer(hidden.spikes, model.layers[1], cfg.lif);
      }
    } else {
      const snn::SynapseMatrix weights = read_weight_csv(weights_path);
      if (input.size() != weights.pre_count())
        throw snn::DimensionError(std::string(input_path) + " has " + std::to_string(input.size()) +
                                  " inputs, weights have " + std::to_string(weights.pre_count()) + " rows");
      trace = snn::simulate_layer(input, weights, cfg.lif);
    }
    auto out = open_out(out_csv);
    snn::write_trace_csv(out, trace);
  });
}

snn_status snn_train_unsupervised(const snn_config* config, const snn_dataset* data,
                                  snn_train_mode mode, int epochs, uint64_t seed,
                                  const char* history_csv, snn_model** out) {
  return guarded([&] {
    require(config, "config");
    require(data, "dataset");
    require(out, "out");
    snn::TrainResult result;
    if (mode == SNN_TRAIN_UNSUP_SINGLE)
      result = snn::train_unsupervised_single(data->value, config->value, epochs, seed);
    else if (mode == SNN_TRAIN_UNSUP_BILAYER)
      result = snn::train_unsupervised_bilayer(data->value, config->value, epochs, seed);
    else
      throw snn::DomainError("unknown training mode");
    write_history(history_csv, result);
    *out = new snn_model{std::move(result.model)};
  });
}

snn_status snn_guidance_extract(const snn_model* model, const snn_dataset* data, uint64_t seed,
                                snn_guidance** out) {
  return guarded([&] {
    require(model, "model");
    require(data, "dataset");
    require(out, "out");
    if (data->value.classes != model->value.class_names)
      throw snn::DataError("dataset classes differ from the model's classes");
    const auto reps = snn::select_representatives(model->value, data->value, seed);
    *out = new snn_guidance{snn::extract_guidance(model->value, reps, seed)};
  });
}

snn_status snn_guidance_load(const char* csv_path, snn_guidance** out) {
  return guarded([&] {
    require(csv_path, "path");
    require(out, "out");
    std::ifstream in(csv_path);
    if (!in) throw snn::DataError(std::string("cannot open guidance ") + csv_path);
    *out = new snn_guidance{snn::read_guidance_csv(in)};
  });
}

snn_status snn_guidance_save(const snn_guidance* guidance, const char* csv_path) {
  return guarded([&] {
    require(guidance, "guidance");
    require(csv_path, "path");
    auto out = open_out(csv_path);
    snn::write_guidance_csv(out, guidance->value);
  });
}

void snn_guidance_free(snn_guidance* guidance) { delete guidance; }

snn_status snn_train_supervised(const snn_config* config, const snn_dataset* data,
                                const snn_guidance* guidance, int epochs, uint64_t seed,
                                const char* history_csv, snn_model** out) {
  return guarded([&] {
    require(config, "config");
    require(data, "dataset");
    require(guidance, "guidance");
    require(out, "out");
    auto result = snn::train_supervised(data->value, guidance->value, config->value, epochs, seed);
    write_history(history_csv, result);
    *out = new snn_model{std::move(result.model)};
  });
}

snn_status snn_model_load(const char* path, snn_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new snn_model{snn::load_checkpoint(path)};
  });
}

snn_status snn_model_save(const snn_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    snn::save_checkpoint(model->value, path);
  });
}

void snn_model_free(snn_model* model) { delete model; }

snn_status snn_model_set_guidance(snn_model* model, const snn_guidance* guidance) {
  return guarded([&] {
    require(model, "model");
    require(guidance, "guidance");
    if (model->value.mode != snn::ModelMode::kSupervised)
      throw snn::FormatError("only supervised models carry guidance");
    const auto& g = guidance->value.traces;
    if (g.rows() != model->value.class_count() || g.cols() != model->value.config.lif.duration + 1)
      throw snn::DimensionError("guidance shape does not match the model");
    model->value.guidance = g.cast<float>().cast<double>();
  });
}

int snn_model_class_count(const snn_model* model) { return model ? model->value.class_count() : 0; }

snn_status snn_model_class_name(const snn_model* model, int label, char* buf, size_t len) {
  return guarded([&] {
    require(model, "model");
    require(buf, "buffer");
    if (label < 0 || label >= model->value.class_count())
      throw snn::DomainError("label " + std::to_string(label) + " out of range");
    const std::string& name = model->value.class_names[static_cast<size_t>(label)];
    if (len == 0) return;
    const size_t n = std::min(len - 1, name.size());
    std::memcpy(buf, name.data(), n);
    buf[n] = '\0';
  });
}

snn_status snn_model_stats(const snn_model* model, snn_stats* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto stats = snn::model_stats(model->value);
    *out = snn_stats{};
    out->parameters = stats.parameters;
    out->bytes = stats.bytes;
    out->macs_per_tu = stats.macs_per_tu;
    out->macs_per_image = stats.macs_per_image;
    out->layer_count = static_cast<int>(stats.topology.size()) - 1;
    for (size_t k = 0; k < stats.topology.size() && k < 8; ++k) out->topology[k] = stats.topology[k];
  });
}

snn_status snn_export_features(const snn_model* model, const char* prefix, int* written) {
  return guarded([&] {
    require(model, "model");
    require(prefix, "prefix");
    const auto files = snn::export_feature_maps(model->value, prefix);
    if (written) *written = static_cast<int>(files.size());
  });
}

snn_status snn_classify_file(const snn_model* model, const char* image_path, uint64_t seed,
                             int* label) {
  return guarded([&] {
    require(model, "model");
    require(image_path, "image path");
    require(label, "label");
    const auto result = snn::predict(model->value, snn::load_image(image_path), seed, 0);
    *label = result ? *result : -1;
  });
}

snn_status snn_evaluate(const snn_model* model, const snn_dataset* data, snn_split split,
                        uint64_t seed, int jobs, const char* report_csv, double* accuracy) {
  return guarded([&] {
    require(model, "model");
    require(data, "dataset");
    if (data->value.classes != model->value.class_names)
      throw snn::DataError("dataset classes differ from the model's classes");
    const auto report = snn::evaluate(model->value, pick(data->value, split), seed, jobs);
    if (report_csv) {
      auto out = open_out(report_csv);
      snn::write_report_csv(out, report, model->value.class_names);
    }
    if (accuracy) *accuracy = report.overall_accuracy;
  });
}

snn_status snn_noise_sweep(const snn_model* model, const snn_dataset* data, const double* snr_db,
                           size_t count, uint64_t seed, int jobs, const char* sweep_csv,
                           double* accuracies) {
  return guarded([&] {
    require(model, "model");
    require(data, "dataset");
    if (count > 0) require(snr_db, "snr list");
    if (data->value.classes != model->value.class_names)
      throw snn::DataError("dataset classes differ from the model's classes");
    const std::vector<double> levels(snr_db, snr_db + count);
    const auto sweep = snn::noise_sweep(model->value, data->value.split(snn::Split::kTest), levels, seed, jobs);
    if (sweep_csv) {
      auto out = open_out(sweep_csv);
      snn::write_sweep_csv(out, sweep, model->value.class_names);
    }
    if (accuracies)
      for (size_t k = 0; k < sweep.size(); ++k) accuracies[k] = sweep[k].report.overall_accuracy;
  });
}

}  // extern "C"
