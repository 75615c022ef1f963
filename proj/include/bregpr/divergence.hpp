#pragma once

#include "bregpr/stft.hpp"

#include <Eigen/Core>

#include <string_view>

namespace bregpr {

enum class Direction
{
  right, ///< D(r | |As|^d)
  left,  ///< D(|As|^d | r)
};

Direction parse_direction(std::string_view name);
std::string_view to_string(Direction direction);

/// Fixes the per-source objective: beta-divergence, argument order, and
/// whether the targets are magnitudes (d = 1) or powers (d = 2).
struct DivergenceSpec
{
  double beta = 2.0;
  Direction direction = Direction::right;
  int d = 1;

  void validate() const;
};

inline constexpr double default_eps_floor = 1e-12;

// Generating function of the beta-divergence and its first two derivatives.
// Exact limit forms are used at beta = 1 (x log x - x) and beta = 0 (-log x).
// Arguments must be >= 0; at x = 0 the value is returned when the limit is
// finite and an Error is thrown otherwise.
double psi(double beta, double x);
double psi_prime(double beta, double x);
double psi_second(double beta, double x);

Eigen::MatrixXd psi_prime(double beta, const Eigen::MatrixXd& x);
Eigen::MatrixXd psi_second(double beta, const Eigen::MatrixXd& x);

/// Bregman divergence sum_k [psi(r_k) - psi(z_k) - psi'(z_k) (r_k - z_k)].
double bregman(double beta, const Eigen::MatrixXd& r, const Eigen::MatrixXd& z);

/// Same sum with each row (frequency bin) scaled by `row_weights`.
double bregman(double beta, const Eigen::MatrixXd& r, const Eigen::MatrixXd& z,
               const Eigen::VectorXd& row_weights);

/// Floors magnitudes at eps and returns max(|S|, eps)^d.
Eigen::MatrixXd floored_magnitude_power(const Eigen::MatrixXcd& spec, int d,
                                        double eps);

/// Floors d-power targets at eps^d, the same floor applied to |S|^d.
Eigen::MatrixXd floored_measurements(const Measurements& r, double eps);

/// J(s) evaluated on the full spectrum: the one-sided grid is summed with
/// Hermitian bin weights, so it equals the objective for the two-sided STFT.
double objective(const DivergenceSpec& spec, const Measurements& r,
                 const Signal& s, const StftConfig& config,
                 double eps = default_eps_floor);

/// Objective from a precomputed |S|^d (already floored).
double objective_from_magnitude(const DivergenceSpec& spec,
                                const Eigen::MatrixXd& r_floored,
                                const Eigen::MatrixXd& mag_d,
                                const Eigen::VectorXd& row_weights);

/// Right: psi''(mag_d) * (mag_d - r). Left: psi'(mag_d) - psi'(r).
Eigen::MatrixXd z_term(const DivergenceSpec& spec, const Eigen::MatrixXd& r,
                       const Eigen::MatrixXd& mag_d);

} // namespace bregpr
