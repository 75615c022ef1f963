#pragma once

// Test-only helpers: seeded generators and oracles that do not go through the
// library's internal code paths.

#include "bregpr/divergence.hpp"
#include "bregpr/stft.hpp"

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace bregpr::testing {

inline Signal random_signal(std::mt19937_64& rng, Eigen::Index length,
                            double scale = 1.0)
{
  std::normal_distribution<double> normal(0.0, scale);
  Signal s{Eigen::VectorXd(length), 16000};
  for (Eigen::Index i = 0; i < length; ++i) s.samples[i] = normal(rng);
  return s;
}

inline Eigen::MatrixXd random_positive(std::mt19937_64& rng, Eigen::Index rows,
                                       Eigen::Index cols, double lo = 0.1,
                                       double hi = 10.0)
{
  // Log-uniform so that small and large entries are both exercised.
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index k = 0; k < rows; ++k) m(k, j) = std::exp(u(rng));
  return m;
}

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, Eigen::Index rows,
                                       Eigen::Index cols)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index k = 0; k < rows; ++k)
      m(k, j) = {normal(rng), normal(rng)};
  return m;
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  return (a - b).cwiseAbs().maxCoeff();
}

inline double relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want)
{
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

/// Central finite differences of the objective, step h relative to the
/// signal's RMS.
inline Eigen::VectorXd finite_difference_gradient(const DivergenceSpec& spec,
                                                  const Measurements& r,
                                                  const Signal& s,
                                                  const StftConfig& config,
                                                  double rel_step = 1e-6)
{
  const double rms = s.samples.norm() / std::sqrt(static_cast<double>(s.size()));
  const double h = rel_step * std::max(rms, 1e-12);
  Eigen::VectorXd g(s.size());
  Signal probe = s;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double orig = probe.samples[i];
    probe.samples[i] = orig + h;
    const double up = objective(spec, r, probe, config);
    probe.samples[i] = orig - h;
    const double down = objective(spec, r, probe, config);
    probe.samples[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Direct evaluation of the beta-divergence in its closed forms:
/// IS at beta = 0, KL at beta = 1, and the general power form otherwise.
inline double beta_divergence_direct(double beta, double x, double y)
{
  if (beta == 0.0) return x / y - std::log(x / y) - 1.0;
  if (beta == 1.0) return x * std::log(x / y) - x + y;
  return (std::pow(x, beta) + (beta - 1.0) * std::pow(y, beta) -
          beta * x * std::pow(y, beta - 1.0)) /
         (beta * (beta - 1.0));
}

inline double beta_divergence_direct(double beta, const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& y)
{
  double total = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index k = 0; k < x.rows(); ++k)
      total += beta_divergence_direct(beta, x(k, j), y(k, j));
  return total;
}

/// Naive two-sided weighted quadratic loss ||r - |As|||^2 on the full spectrum.
inline double quadratic_loss(const Eigen::MatrixXd& r, const Eigen::MatrixXcd& S,
                             int fft_size)
{
  double total = 0.0;
  for (Eigen::Index k = 0; k < r.rows(); ++k) {
    const bool edge = k == 0 || (fft_size % 2 == 0 && k == fft_size / 2);
    const double w = edge ? 1.0 : 2.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const double e = r(k, j) - std::abs(S(k, j));
      total += w * e * e;
    }
  }
  return total;
}

/// Speech-like test tone: harmonic series with slow pitch glide and a
/// syllable-rate amplitude envelope.
inline Signal synthetic_voice(std::mt19937_64& rng, Eigen::Index length,
                              int sample_rate = 16000)
{
  std::uniform_real_distribution<double> f0_pick(100.0, 220.0);
  std::uniform_real_distribution<double> rate_pick(2.5, 5.0);
  std::uniform_real_distribution<double> phase_pick(0.0, 2.0 * std::numbers::pi);
  const double f0 = f0_pick(rng);
  const double syllable_rate = rate_pick(rng);
  const double env_phase = phase_pick(rng);
  Signal s{Eigen::VectorXd::Zero(length), sample_rate};
  double phase = 0.0;
  for (Eigen::Index i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0 * (1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * 0.7 * t));
    phase += 2.0 * std::numbers::pi * f / sample_rate;
    double v = 0.0;
    for (int h = 1; h <= 12; ++h) v += std::sin(h * phase) / h;
    const double env =
        0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * syllable_rate * t + env_phase));
    s.samples[i] = 0.2 * env * env * v;
  }
  return s;
}

/// Low-pass filtered white noise (one-pole), normalized to peak 0.5.
inline Signal synthetic_noise(std::mt19937_64& rng, Eigen::Index length,
                              int sample_rate = 16000)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Signal s{Eigen::VectorXd(length), sample_rate};
  double state = 0.0;
  for (Eigen::Index i = 0; i < length; ++i) {
    state = 0.9 * state + normal(rng);
    s.samples[i] = state;
  }
  s.samples *= 0.5 / s.samples.cwiseAbs().maxCoeff();
  return s;
}

} // namespace bregpr::testing
