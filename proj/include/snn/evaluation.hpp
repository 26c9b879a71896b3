#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "snn/dataset.hpp"
#include "snn/model.hpp"
#include "snn/stdp.hpp"

namespace snn {

struct EvalReport {
  std::vector<std::vector<long>> confusion;  // [true class][predicted class]
  std::vector<double> per_class_accuracy;
  double overall_accuracy = 0.0;
  long no_decision_count = 0;
  long total = 0;
  std::vector<int> predictions;  // per sample, -1 for no decision
};

/// Label predicted for one image (encoded with stream (seed, index)), or
/// empty for no decision. Works for every model mode.
std::optional<int> predict(const Model& model, const Image& image, uint64_t seed, uint64_t index);

/// Scores the samples in order. `jobs` > 1 fans out across threads; the
/// report does not depend on it.
EvalReport evaluate(const Model& model, const std::vector<Sample>& samples, uint64_t seed,
                    int jobs = 1);

struct SweepEntry {
  double snr_db = 0.0;
  EvalReport report;
};

/// Evaluates the samples once per SNR level, in list order. Infinite SNR
/// reproduces the clean evaluation exactly.
std::vector<SweepEntry> noise_sweep(const Model& model, const std::vector<Sample>& samples,
                                    const std::vector<double>& snr_db, uint64_t seed, int jobs = 1);

void write_report_csv(std::ostream& out, const EvalReport& report,
                      const std::vector<std::string>& classes);
void write_sweep_csv(std::ostream& out, const std::vector<SweepEntry>& sweep,
                     const std::vector<std::string>& classes);
/// epoch, acc_<class>..., overall[, test_overall], bijective
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history,
                       const std::vector<std::string>& classes);

}  // namespace snn
