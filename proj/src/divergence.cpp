#include "bregpr/divergence.hpp"

#include "bregpr/error.hpp"

#include <cmath>
#include <string>

namespace bregpr {

namespace {

void check_domain(double x)
{
  if (!(x >= 0.0) || !std::isfinite(x))
    throw Error("beta-divergence argument must be finite and >= 0, got " +
                std::to_string(x));
}

[[noreturn]] void throw_pole(const char* what, double beta)
{
  throw Error(std::string(what) + " is infinite at x = 0 for beta = " +
              std::to_string(beta) + "; floor the input first");
}

void check_shapes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("shape mismatch: " + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                "x" + std::to_string(b.cols()));
}

} // namespace

Direction parse_direction(std::string_view name)
{
  if (name == "right") return Direction::right;
  if (name == "left") return Direction::left;
  throw Error("unknown direction '" + std::string(name) + "'");
}

std::string_view to_string(Direction direction)
{
  return direction == Direction::right ? "right" : "left";
}

void DivergenceSpec::validate() const
{
  if (!(beta >= 0.0 && beta <= 2.0))
    throw Error("beta must lie in [0, 2], got " + std::to_string(beta));
  if (d != 1 && d != 2) throw Error("exponent d must be 1 or 2");
}

double psi(double beta, double x)
{
  check_domain(x);
  if (beta == 0.0) {
    if (x == 0.0) throw_pole("psi", beta);
    return -std::log(x);
  }
  if (beta == 1.0) return x == 0.0 ? 0.0 : x * std::log(x) - x;
  if (beta == 2.0) return 0.5 * x * x;
  return std::pow(x, beta) / (beta * (beta - 1.0));
}

double psi_prime(double beta, double x)
{
  check_domain(x);
  if (x == 0.0 && beta <= 1.0) throw_pole("psi'", beta);
  if (beta == 0.0) return -1.0 / x;
  if (beta == 1.0) return std::log(x);
  if (beta == 2.0) return x;
  return std::pow(x, beta - 1.0) / (beta - 1.0);
}

double psi_second(double beta, double x)
{
  check_domain(x);
  if (x == 0.0 && beta < 2.0) throw_pole("psi''", beta);
  if (beta == 0.0) return 1.0 / (x * x);
  if (beta == 1.0) return 1.0 / x;
  if (beta == 2.0) return 1.0;
  return std::pow(x, beta - 2.0);
}

Eigen::MatrixXd psi_prime(double beta, const Eigen::MatrixXd& x)
{
  return x.unaryExpr([beta](double v) { return psi_prime(beta, v); });
}

Eigen::MatrixXd psi_second(double beta, const Eigen::MatrixXd& x)
{
  return x.unaryExpr([beta](double v) { return psi_second(beta, v); });
}

double bregman(double beta, const Eigen::MatrixXd& r, const Eigen::MatrixXd& z)
{
  return bregman(beta, r, z, Eigen::VectorXd::Ones(r.rows()));
}

double bregman(double beta, const Eigen::MatrixXd& r, const Eigen::MatrixXd& z,
               const Eigen::VectorXd& row_weights)
{
  check_shapes(r, z);
  if (row_weights.size() != r.rows())
    throw Error("row weight count does not match the number of rows");
  double total = 0.0;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    for (Eigen::Index k = 0; k < r.rows(); ++k) {
      const double rk = r(k, j);
      const double zk = z(k, j);
      double term = 0.0;
      if (rk != zk)
        term = psi(beta, rk) - psi(beta, zk) - psi_prime(beta, zk) * (rk - zk);
      // Rounding can push an exact-zero term slightly negative.
      total += row_weights[k] * std::max(term, 0.0);
    }
  }
  return total;
}

Eigen::MatrixXd floored_magnitude_power(const Eigen::MatrixXcd& spec, int d,
                                        double eps)
{
  Eigen::MatrixXd mag = spec.cwiseAbs().cwiseMax(eps);
  if (d == 2) return mag.array().square().matrix();
  return mag;
}

Eigen::MatrixXd floored_measurements(const Measurements& r, double eps)
{
  const double floor = r.d == 2 ? eps * eps : eps;
  return r.data.cwiseMax(floor);
}

double objective_from_magnitude(const DivergenceSpec& spec,
                                const Eigen::MatrixXd& r_floored,
                                const Eigen::MatrixXd& mag_d,
                                const Eigen::VectorXd& row_weights)
{
  if (spec.direction == Direction::right)
    return bregman(spec.beta, r_floored, mag_d, row_weights);
  return bregman(spec.beta, mag_d, r_floored, row_weights);
}

double objective(const DivergenceSpec& spec, const Measurements& r,
                 const Signal& s, const StftConfig& config, double eps)
{
  spec.validate();
  if (r.d != spec.d)
    throw Error("measurement exponent does not match the divergence spec");
  const auto S = stft(s, config);
  return objective_from_magnitude(spec, floored_measurements(r, eps),
                                  floored_magnitude_power(S.data, spec.d, eps),
                                  hermitian_bin_weights(config));
}

Eigen::MatrixXd z_term(const DivergenceSpec& spec, const Eigen::MatrixXd& r,
                       const Eigen::MatrixXd& mag_d)
{
  check_shapes(r, mag_d);
  if (spec.direction == Direction::right)
    return psi_second(spec.beta, mag_d).cwiseProduct(mag_d - r);
  return psi_prime(spec.beta, mag_d) - psi_prime(spec.beta, r);
}

} // namespace bregpr
