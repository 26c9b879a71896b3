#pragma once

#include <cstdint>
#include <vector>

#include "snn/config.hpp"
#include "snn/dataset.hpp"
#include "snn/model.hpp"

namespace snn::detail {

struct Prepared {
  std::vector<Sample> train;
  Model model;
};

/// Validates inputs and fills in geometry, classes and config of an
/// untrained model. Layers are left empty.
Prepared prepare_training(const Dataset& data, const RunConfig& config, ModelMode mode,
                          uint64_t seed);

/// Seeded presentation order for one epoch.
std::vector<size_t> epoch_order(size_t n, uint64_t seed, int epoch);

/// Encoder stream index used while training; disjoint from evaluation
/// streams, which use the plain sample position.
uint64_t training_stream(int epoch, size_t sample);

}  // namespace snn::detail
