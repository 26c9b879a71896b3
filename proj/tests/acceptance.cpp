// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   snn_acceptance <configs-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "snn/config.hpp"
#include "snn/dataset.hpp"
#include "snn/encoding.hpp"
#include "snn/error.hpp"
#include "snn/evaluation.hpp"
#include "snn/model_io.hpp"
#include "snn/neuron.hpp"
#include "snn/stdp.hpp"
#include "snn/supervised.hpp"

using namespace snn;
namespace fx = snn::fixtures;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

int first_epoch(const std::vector<EpochRecord>& history,
                const std::function<bool(const EpochRecord&)>& ok) {
  for (const auto& r : history)
    if (ok(r)) return r.epoch;
  return -1;
}

// Shared between criteria 5, 7 and 9.
struct FixtureRun {
  RunConfig config;
  Dataset data;
  TrainResult single;
  TrainResult bilayer;
  double single_seconds = 0.0;
};

Verdict gradient_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  const int cases = 200;
  double worst = 0.0;
  for (int k = 0; k < cases; ++k) {
    const auto c = fx::random_gradient_case(rng);
    worst = std::max(worst, fx::gradient_check(c, 10.0, 1.0));
  }
  const double secs = seconds_since(start);
  return {worst < 1e-5 && secs < 10.0,
          fmt("%.0f instances, worst relative error %.2e, %.2f s", cases, worst, secs)};
}

Verdict encoder_statistics() {
  EncoderSpec spec;
  spec.duration = 100;
  const double p = 0.788;
  std::mt19937_64 rng(5);
  const int trials = 10000;
  double total = 0.0;
  for (int k = 0; k < trials; ++k) total += encode_random(p, spec, rng).count();
  const double mean = total / trials;
  const double sigma = std::sqrt(spec.duration * p * (1.0 - p) / trials);
  const double f_det = deterministic_frequency(p, spec);
  const int spikes = encode_deterministic(p, spec).count();
  const bool ok = std::abs(mean - 78.8) <= 3.0 * sigma && std::abs(f_det - 15.972) < 1e-12 && spikes == 16;
  return {ok, fmt("random mean %.4f (3 sigma %.4f), f_det %.6f, %.0f deterministic spikes", mean,
                  3.0 * sigma, f_det, spikes)};
}

Verdict stdp_suite() {
  StdpParams p;
  bool shape = stdp_window(0.0, p) == p.a_plus;
  for (double s = 0.25; s <= 40.0; s += 0.25) {
    shape = shape && stdp_window(s, p) > 0.0 && stdp_window(-s, p) < 0.0;
    shape = shape && stdp_window(s, p) < stdp_window(0.0, p) && std::abs(stdp_window(-s, p)) < stdp_window(0.0, p);
    shape = shape && std::abs(stdp_window(s, p) - p.a_plus * std::exp(-s / p.tau_plus)) < 1e-15;
    shape = shape && std::abs(stdp_window(-s, p) + p.a_minus * std::exp(-s / p.tau_minus)) < 1e-15;
    shape = shape && stdp_window(s + 0.25, p) < stdp_window(s, p);
    shape = shape && stdp_window(-s - 0.25, p) > stdp_window(-s, p);
  }

  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size_dist(1, 6), op_dist(0, 2), len_dist(1, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  long operations = 0;
  bool bounded = true;
  for (int seq = 0; seq < 10000 && bounded; ++seq) {
    StdpParams q;
    q.a_plus = 3.0 * unit(rng);
    q.a_minus = 3.0 * unit(rng);
    q.silent_decay = 2.0 * unit(rng);
    q.w_min = -2.0 * unit(rng);
    q.w_max = 2.0 * unit(rng) + 1e-3;
    const int m = size_dist(rng), n = size_dist(rng);
    const TimeUnit T = 30;
    SynapseMatrix syn(m, n, q.w_min, q.w_max, q.w_min + unit(rng) * (q.w_max - q.w_min));
    const int length = len_dist(rng);
    for (int op = 0; op < length; ++op) {
      SpikeField pre(m, T);
      const double rate = unit(rng);
      for (int i = 0; i < m; ++i)
        for (TimeUnit t = 0; t <= T; ++t)
          if (unit(rng) < rate) pre[i].set(t);
      const int post = static_cast<int>(unit(rng) * n);
      switch (op_dist(rng)) {
        case 0: apply_stdp_at(static_cast<TimeUnit>(unit(rng) * (T + 1)), post, pre, syn, q); break;
        case 1: micro_modify(post, pre, syn, q); break;
        default: syn.add(static_cast<int>(unit(rng) * m), post, 10.0 * (unit(rng) - 0.5)); break;
      }
      ++operations;
      bounded = bounded && syn.within_bounds();
    }
  }
  return {shape && bounded, std::string("window shape ") + (shape ? "ok" : "violated") + ", " +
                                std::to_string(operations) + " updates over 10000 sequences, bounds " +
                                (bounded ? "held" : "violated")};
}

Verdict wta_and_refractory() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pre_dist(1, 24), post_dist(1, 8), t_dist(20, 120), ref_dist(0, 25);
  long spikes = 0;
  std::string broken;
  for (int run = 0; run < 1000 && broken.empty(); ++run) {
    LifParams lif;
    lif.t_ref = ref_dist(rng);
    lif.duration = t_dist(rng);
    const int m = pre_dist(rng), n = post_dist(rng);
    Matrix w(m, n);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = -20.0 + 80.0 * unit(rng);
    const SynapseMatrix syn(w, -20.0, 60.0);
    SpikeField pre(m, lif.duration);
    const double rate = unit(rng);
    for (int i = 0; i < m; ++i)
      for (TimeUnit t = 0; t <= lif.duration; ++t)
        if (unit(rng) < rate) pre[i].set(t);
    const LayerTrace trace = simulate_layer(pre, syn, lif);

    for (TimeUnit t = 0; t <= lif.duration; ++t) {
      int firing = 0;
      for (int j = 0; j < n; ++j) firing += trace.spikes[j].fired(t);
      if (firing > 1) broken = "two spikes in one time unit";
    }
    for (int j = 0; j < n; ++j)
      for (TimeUnit t : trace.spikes[j].times()) {
        ++spikes;
        for (TimeUnit u = t; u <= std::min(lif.duration, t + lif.t_ref); ++u) {
          if (u > t && trace.spikes[j].fired(u)) broken = "spike inside the refractory period";
          if (trace.potentials(j, u) != lif.p_reset) broken = "potential left p_reset while refractory";
        }
      }

    // Under saturating drive the gap between spikes is exactly t_ref + 1.
    SpikeField drive(1, lif.duration);
    for (TimeUnit t = 0; t <= lif.duration; ++t) drive[0].set(t);
    const auto times = simulate_layer(drive, SynapseMatrix(1, 1, 0.0, 1000.0, 1000.0), lif).spikes[0].times();
    if (times.size() < 2 && lif.duration > 2 * (lif.t_ref + 1)) broken = "saturated neuron fired once";
    for (size_t k = 1; k < times.size(); ++k)
      if (times[k] - times[k - 1] != lif.t_ref + 1) broken = "refractory period is not exact";
  }
  return {broken.empty(), broken.empty() ? "1000 runs, " + std::to_string(spikes) + " spikes checked"
                                         : broken};
}

Verdict fixture_unsupervised(FixtureRun& run) {
  const int epochs = 20;
  auto start = Clock::now();
  run.single = train_unsupervised_single(run.data, run.config, epochs, 1);
  run.single_seconds = seconds_since(start);
  start = Clock::now();
  run.bilayer = train_unsupervised_bilayer(run.data, run.config, epochs, 1);
  const double bilayer_seconds = seconds_since(start);

  const int single_done =
      first_epoch(run.single.history, [](const EpochRecord& r) { return r.bijective && r.overall >= 0.95; });
  const int single_bij = first_epoch(run.single.history, [](const EpochRecord& r) { return r.bijective; });
  const int bilayer_bij = first_epoch(run.bilayer.history, [](const EpochRecord& r) { return r.bijective; });
  const bool ok = single_done > 0 && run.single_seconds < 120.0 && bilayer_bij > 0 && single_bij > 0 &&
                  bilayer_bij <= single_bij;
  return {ok, fmt("single: bijective at epoch %.0f, >=95%% at epoch %.0f (%.1f s); ", single_bij, single_done,
                  run.single_seconds) +
                  fmt("bilayer: bijective at epoch %.0f (%.1f s)", bilayer_bij, bilayer_seconds)};
}

Verdict speckle_pipeline(const fs::path& configs) {
  const RunConfig config = parse_config(configs / "speckle.conf");
  const auto start = Clock::now();
  const Dataset data = synthesize_dataset(SyntheticSpec{3, 50, 20, 64, 7});
  const uint64_t seed = 1;
  const TrainResult unsup = train_unsupervised_single(data, config, config.unsup_epochs, seed);
  const GuidanceBundle guidance =
      extract_guidance(unsup.model, select_representatives(unsup.model, data, seed), seed);
  const TrainResult sup = train_supervised(data, guidance, config, config.sup_epochs, seed);
  const EvalReport report = evaluate(sup.model, data.split(Split::kTest), seed);
  const double secs = seconds_since(start);

  if (sup.history.size() < 25) return {false, "supervised history shorter than 25 epochs"};
  const double at5 = sup.history[4].test_overall.value_or(-1.0);
  const double at25 = sup.history[24].test_overall.value_or(-1.0);
  const bool ok = report.overall_accuracy >= 0.95 && secs < 600.0 && at25 >= at5;
  return {ok, fmt("test accuracy %.3f, epoch 5 %.3f, epoch 25 %.3f, %.1f s", report.overall_accuracy, at5,
                  at25, secs)};
}

Verdict noise_trend(const FixtureRun& run) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto test = run.data.split(Split::kTest);
  const EvalReport clean = evaluate(run.single.model, test, 3);
  const auto sweep = noise_sweep(run.single.model, test, {inf, 10.0, 5.0, 0.0, -5.0}, 3);
  const double a_inf = sweep[0].report.overall_accuracy;
  const double a10 = sweep[1].report.overall_accuracy;
  const double a_m5 = sweep[4].report.overall_accuracy;
  const bool identical = a_inf == clean.overall_accuracy && sweep[0].report.predictions == clean.predictions;
  return {identical && a10 >= a_m5,
          fmt("clean %.3f, inf %.3f, 10 dB %.3f, -5 dB %.3f", clean.overall_accuracy, a_inf, a10, a_m5)};
}

Verdict parameter_count() {
  Model m;
  m.input_width = m.input_height = 128;
  m.class_names = {"a", "b", "c"};
  m.layers.emplace_back(16384, 3, -1.2, 1.4);
  const ModelStats stats = model_stats(m);
  char millions[32];
  std::snprintf(millions, sizeof millions, "%.1e", stats.parameters / 1e6);
  const bool ok = stats.parameters == 49152 && std::string(millions) == "4.9e-02";
  return {ok, std::to_string(stats.parameters) + " parameters = " + millions + " M"};
}

// Everything a fixed-seed run writes, concatenated.
std::string pipeline_outputs(const Dataset& data, uint64_t seed) {
  std::ostringstream out;
  const TrainResult unsup = train_unsupervised_single(data, fx::guidance_config(), 6, seed);
  write_history_csv(out, unsup.history, data.classes);
  const auto test = data.split(Split::kTest);
  write_report_csv(out, evaluate(unsup.model, test, seed), data.classes);
  write_sweep_csv(out, noise_sweep(unsup.model, test, {10.0, 0.0}, seed), data.classes);
  const GuidanceBundle guidance =
      extract_guidance(unsup.model, select_representatives(unsup.model, data, seed), seed);
  write_guidance_csv(out, guidance);
  const TrainResult sup = train_supervised(data, guidance, fx::fixture_config(), 4, seed);
  write_history_csv(out, sup.history, data.classes);
  write_report_csv(out, evaluate(sup.model, test, seed), data.classes);
  write_checkpoint(out, sup.model);
  return out.str();
}

bool round_trips(const Model& model) {
  std::ostringstream first;
  write_checkpoint(first, model);
  std::istringstream in(first.str());
  const Model loaded = read_checkpoint(in);
  std::ostringstream second;
  write_checkpoint(second, loaded);
  return loaded == model && first.str() == second.str();
}

Verdict determinism(const FixtureRun& run) {
  const std::string a = pipeline_outputs(run.data, 4);
  const std::string b = pipeline_outputs(run.data, 4);

  const GuidanceBundle guidance =
      extract_guidance(run.single.model, select_representatives(run.single.model, run.data, 1), 1);
  const TrainResult sup = train_supervised(run.data, guidance, run.config, 2, 1);
  const bool single = round_trips(run.single.model);
  const bool bilayer = round_trips(run.bilayer.model);
  const bool supervised = round_trips(sup.model);
  const bool ok = a == b && single && bilayer && supervised;
  return {ok, std::string("pipeline outputs ") + (a == b ? "identical" : "differ") + " (" +
                  std::to_string(a.size()) + " bytes); checkpoints single " + (single ? "ok" : "differ") +
                  ", bilayer " + (bilayer ? "ok" : "differ") + ", supervised " +
                  (supervised ? "ok" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path configs = argc > 1 ? fs::path(argv[1]) : fs::path("configs");
  FixtureRun fixture;
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
    const auto start = Clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("criterion %d %s: %s [%s] (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", name, v.detail.c_str(),
                seconds_since(start));
    std::fflush(stdout);
  };

  try {
    fixture.config = parse_config(configs / "fixture.conf");
    fixture.data = fx::fixture_data();
  } catch (const std::exception& e) {
    std::printf("cannot set up the fixture: %s\n", e.what());
    return 2;
  }

  report(1, "gradient oracle", gradient_oracle);
  report(2, "encoder statistics", encoder_statistics);
  report(3, "STDP window and weight bounds", stdp_suite);
  report(4, "winner-takes-all and refractory invariants", wta_and_refractory);
  report(5, "fixture unsupervised training", [&] { return fixture_unsupervised(fixture); });
  report(6, "speckle supervised pipeline", [&] { return speckle_pipeline(configs); });
  report(7, "noise robustness trend", [&] {
    if (fixture.single.model.layers.empty()) return Verdict{false, "no fixture model (criterion 5 failed)"};
    return noise_trend(fixture);
  });
  report(8, "parameter count", parameter_count);
  report(9, "determinism and checkpoint round trip", [&] {
    if (fixture.bilayer.model.layers.empty()) return Verdict{false, "no fixture models (criterion 5 failed)"};
    return determinism(fixture);
  });

  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
