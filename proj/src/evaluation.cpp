#include "snn/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "snn/error.hpp"
#include "snn/supervised.hpp"

namespace snn {

std::optional<int> predict(const Model& model, const Image& image, uint64_t seed, uint64_t index) {
  if (model.mode == ModelMode::kSupervised) return classify_supervised(model, image, seed, index).label;
  return classify(model, image, seed, index);
}

namespace {

template <typename Fn>
void parallel_for(size_t count, int jobs, Fn fn) {
  const size_t workers = std::min<size_t>(count, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

EvalReport tally(const std::vector<int>& predictions, const std::vector<Sample>& samples,
                 int classes) {
  EvalReport report;
  report.predictions = predictions;
  report.total = static_cast<long>(samples.size());
  report.confusion.assign(static_cast<size_t>(classes), std::vector<long>(static_cast<size_t>(classes), 0));
  std::vector<long> per_class_total(static_cast<size_t>(classes), 0);
  long correct = 0;
  for (size_t k = 0; k < samples.size(); ++k) {
    const int label = samples[k].label;
    ++per_class_total[static_cast<size_t>(label)];
    if (predictions[k] < 0) {
      ++report.no_decision_count;
      continue;
    }
    ++report.confusion[static_cast<size_t>(label)][static_cast<size_t>(predictions[k])];
    if (predictions[k] == label) ++correct;
  }
  for (int c = 0; c < classes; ++c) {
    const long n = per_class_total[static_cast<size_t>(c)];
    report.per_class_accuracy.push_back(
        n ? static_cast<double>(report.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)]) / n : 0.0);
  }
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(report.total);
  return report;
}

EvalReport evaluate_images(const Model& model, const std::vector<Sample>& samples,
                           const std::vector<Image>* replaced, uint64_t seed, int jobs) {
  if (samples.empty()) throw DataError("evaluation split is empty");
  for (const auto& s : samples)
    if (s.label < 0 || s.label >= model.class_count())
      throw DataError("sample label " + std::to_string(s.label) + " outside the model's classes");
  std::vector<int> predictions(samples.size(), -1);
  parallel_for(samples.size(), jobs, [&](size_t k) {
    const Image& image = replaced ? (*replaced)[k] : samples[k].image;
    const auto label = predict(model, image, seed, k);
    predictions[k] = label ? *label : -1;
  });
  return tally(predictions, samples, model.class_count());
}

}  // namespace

EvalReport evaluate(const Model& model, const std::vector<Sample>& samples, uint64_t seed, int jobs) {
  return evaluate_images(model, samples, nullptr, seed, jobs);
}

std::vector<SweepEntry> noise_sweep(const Model& model, const std::vector<Sample>& samples,
                                    const std::vector<double>& snr_db, uint64_t seed, int jobs) {
  if (samples.empty()) throw DataError("noise sweep needs a nonempty test split");
  std::vector<SweepEntry> sweep;
  for (double snr : snr_db) {
    if (std::isnan(snr)) throw DomainError("SNR level is NaN");
    SweepEntry entry;
    entry.snr_db = snr;
    if (std::isinf(snr) && snr > 0) {
      entry.report = evaluate(model, samples, seed, jobs);
    } else {
      std::vector<Image> noisy(samples.size());
      const uint64_t level_seed = seed ^ std::bit_cast<uint64_t>(snr) ^ 0x6e6f697365ULL;
      for (size_t k = 0; k < samples.size(); ++k) {
        auto rng = derive_stream(level_seed, k);
        noisy[k] = add_noise(samples[k].image, NoiseSpec{snr, seed}, rng);
      }
      entry.report = evaluate_images(model, samples, &noisy, seed, jobs);
    }
    sweep.push_back(std::move(entry));
  }
  return sweep;
}

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_snr(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& out, const EvalReport& report,
                      const std::vector<std::string>& classes) {
  out << "true_class";
  for (const auto& c : classes) out << ",pred_" << c;
  out << ",accuracy\n";
  for (size_t r = 0; r < classes.size(); ++r) {
    out << classes[r];
    for (long v : report.confusion[r]) out << ',' << v;
    out << ',' << fmt_double(report.per_class_accuracy[r]) << '\n';
  }
  out << "overall";
  for (size_t c = 0; c < classes.size(); ++c) out << ',';
  out << ',' << fmt_double(report.overall_accuracy) << '\n';
  out << "no_decision";
  for (size_t c = 0; c < classes.size(); ++c) out << ',';
  out << ',' << report.no_decision_count << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepEntry>& sweep,
                     const std::vector<std::string>& classes) {
  out << "snr_db";
  for (const auto& c : classes) out << ",acc_" << c;
  out << ",overall,no_decision\n";
  for (const auto& e : sweep) {
    out << fmt_snr(e.snr_db);
    for (double a : e.report.per_class_accuracy) out << ',' << fmt_double(a);
    out << ',' << fmt_double(e.report.overall_accuracy) << ',' << e.report.no_decision_count << '\n';
  }
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history,
                       const std::vector<std::string>& classes) {
  const bool with_test =
      std::any_of(history.begin(), history.end(), [](const EpochRecord& r) { return r.test_overall.has_value(); });
  out << "epoch";
  for (const auto& c : classes) out << ",acc_" << c;
  out << ",overall";
  if (with_test) out << ",test_overall";
  out << ",bijective\n";
  for (const auto& r : history) {
    out << r.epoch;
    for (double a : r.per_class_accuracy) out << ',' << fmt_double(a);
    out << ',' << fmt_double(r.overall);
    if (with_test) out << ',' << (r.test_overall ? fmt_double(*r.test_overall) : "");
    out << ',' << (r.bijective ? 1 : 0) << '\n';
  }
}

}  // namespace snn
