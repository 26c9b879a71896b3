#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "snn/model.hpp"

namespace snn {

/// Checkpoint layout: text header starting with `snncp v1`, ending with
/// `payload <count>`, then every weight (layer by layer, row-major) and the
/// guidance traces as little-endian float32.
void write_checkpoint(std::ostream& out, const Model& model);
Model read_checkpoint(std::istream& in, const std::string& source = "checkpoint");
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

/// One PGM per output neuron: its input weights laid out as the input image
/// and min-max scaled to 0..255. Bilayer models use the composed
/// input->output weights. Returns the written paths.
std::vector<std::filesystem::path> export_feature_maps(const Model& model,
                                                       const std::filesystem::path& prefix);

/// Input weights of every output neuron in input-image geometry.
std::vector<Matrix> feature_maps(const Model& model);

struct ModelStats {
  std::vector<int> topology;
  long parameters = 0;
  long bytes = 0;           // parameters stored as float32
  long macs_per_tu = 0;     // dense multiply-accumulates per time unit
  long macs_per_image = 0;  // macs_per_tu * sedsi_t
};

ModelStats model_stats(const Model& model);

}  // namespace snn
