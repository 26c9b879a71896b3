#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snn/config.hpp"
#include "snn/neuron.hpp"

namespace snn {

enum class ModelMode { kUnsupSingle, kUnsupBilayer, kSupervised };

const char* to_string(ModelMode mode);
ModelMode mode_from_string(const std::string& text);

/// A trained network: topology, weights, parameters and class assignment.
struct Model {
  ModelMode mode = ModelMode::kUnsupSingle;
  int input_width = 0;
  int input_height = 0;
  std::vector<SynapseMatrix> layers;  // input->output, or input->hidden->output
  std::vector<std::string> class_names;
  std::vector<int> class_map;  // output neuron -> class index, -1 when unassigned
  RunConfig config;
  uint64_t seed = 0;
  Matrix guidance;  // supervised mode: class x (T+1) target potentials

  int input_count() const { return input_width * input_height; }
  int output_count() const { return layers.empty() ? 0 : layers.back().post_count(); }
  int class_count() const { return static_cast<int>(class_names.size()); }
  /// Layer sizes from input to output.
  std::vector<int> topology() const;
  /// Every class owned by exactly one output neuron.
  bool class_map_bijective() const;
  /// Output neuron assigned to `label`, or -1.
  int neuron_for_class(int label) const;

  bool operator==(const Model& other) const;
};

}  // namespace snn
