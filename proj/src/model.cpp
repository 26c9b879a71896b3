#include "snn/model.hpp"

#include "snn/error.hpp"

namespace snn {

const char* to_string(ModelMode mode) {
  switch (mode) {
    case ModelMode::kUnsupSingle: return "unsup_single";
    case ModelMode::kUnsupBilayer: return "unsup_bilayer";
    case ModelMode::kSupervised: return "supervised";
  }
  return "unknown";
}

ModelMode mode_from_string(const std::string& text) {
  if (text == "unsup_single") return ModelMode::kUnsupSingle;
  if (text == "unsup_bilayer") return ModelMode::kUnsupBilayer;
  if (text == "supervised") return ModelMode::kSupervised;
  throw FormatError("unknown model mode '" + text + "'");
}

std::vector<int> Model::topology() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(layers.front().pre_count());
  for (const auto& layer : layers) sizes.push_back(layer.post_count());
  return sizes;
}

bool Model::class_map_bijective() const {
  if (class_count() == 0 || static_cast<int>(class_map.size()) != output_count()) return false;
  std::vector<int> owners(static_cast<size_t>(class_count()), 0);
  for (int label : class_map) {
    if (label < 0 || label >= class_count()) return false;
    ++owners[static_cast<size_t>(label)];
  }
  for (int n : owners)
    if (n != 1) return false;
  return true;
}

int Model::neuron_for_class(int label) const {
  for (size_t j = 0; j < class_map.size(); ++j)
    if (class_map[j] == label) return static_cast<int>(j);
  return -1;
}

bool Model::operator==(const Model& other) const {
  return mode == other.mode && input_width == other.input_width &&
         input_height == other.input_height && layers == other.layers &&
         class_names == other.class_names && class_map == other.class_map &&
         config_entries(config) == config_entries(other.config) && seed == other.seed &&
         guidance.rows() == other.guidance.rows() && guidance.cols() == other.guidance.cols() &&
         guidance == other.guidance;
}

}  // namespace snn
