#pragma once

#include <cmath>
#include <random>

#include "snn/supervised.hpp"

namespace snn::fixtures {

// Direct summation over spikes, independent of the library's recursion.
inline Matrix reference_trace(const Matrix& w, const SpikeField& pre, double tau_s) {
  const TimeUnit T = pre.duration();
  Matrix p = Matrix::Zero(w.cols(), T + 1);
  for (int j = 0; j < w.cols(); ++j)
    for (TimeUnit t = 0; t <= T; ++t)
      for (int i = 0; i < pre.size(); ++i)
        for (TimeUnit tk : pre[i].times())
          if (tk <= t) p(j, t) += w(i, j) * std::exp(-(t - tk) / tau_s);
  return p;
}

inline double reference_huber(const Matrix& a, const Matrix& y, double delta) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double d = std::abs(a.data()[k] - y.data()[k]);
    sum += d <= delta ? 0.5 * d * d : delta * (d - 0.5 * delta);
  }
  return sum;
}

struct GradientCase {
  Matrix weights;
  SpikeField pre;
  Matrix target;
};

inline GradientCase random_gradient_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> m_dist(1, 8), n_dist(1, 2), t_dist(2, 20);
  std::uniform_real_distribution<double> w_dist(-1.0, 1.0), y_dist(-3.0, 3.0);
  std::bernoulli_distribution fire(0.35);
  GradientCase c;
  const int m = m_dist(rng), n = n_dist(rng);
  const TimeUnit T = t_dist(rng);
  c.weights = Matrix(m, n);
  for (Eigen::Index k = 0; k < c.weights.size(); ++k) c.weights.data()[k] = w_dist(rng);
  c.pre = SpikeField(m, T);
  for (int i = 0; i < m; ++i)
    for (TimeUnit t = 0; t <= T; ++t)
      if (fire(rng)) c.pre[i].set(t);
  c.target = Matrix(n, T + 1);
  for (Eigen::Index k = 0; k < c.target.size(); ++k) c.target.data()[k] = y_dist(rng);
  return c;
}

// Largest relative difference between the analytic gradient and central
// differences of the reference loss, scaled by max(1, |fd|).
inline double gradient_check(const GradientCase& c, double tau_s, double delta, double h = 1e-5) {
  ResponseKernel kernel{tau_s};
  const Matrix g = grad_weights(c.weights, c.pre, c.target, kernel, delta);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < c.weights.size(); ++k) {
    Matrix up = c.weights, down = c.weights;
    up.data()[k] += h;
    down.data()[k] -= h;
    const double fd = (reference_huber(reference_trace(up, c.pre, tau_s), c.target, delta) -
                       reference_huber(reference_trace(down, c.pre, tau_s), c.target, delta)) /
                      (2.0 * h);
    const double err = std::abs(fd - g.data()[k]) / std::max(1.0, std::abs(fd));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace snn::fixtures
