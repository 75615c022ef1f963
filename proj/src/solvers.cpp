#include "bregpr/solvers.hpp"

#include "bregpr/error.hpp"

#include <cmath>
#include <string>

namespace bregpr {

namespace {

// As / |As|, replaced by 1 where the magnitude vanishes.
Eigen::MatrixXcd unit_phase(const Eigen::MatrixXcd& spec)
{
  return spec.unaryExpr([](const std::complex<double>& z) {
    const double mag = std::abs(z);
    return mag > 0.0 ? z / mag : std::complex<double>(1.0, 0.0);
  });
}

void check_grid(const Measurements& r, const ComplexSpectrogram& spec)
{
  if (r.data.rows() != spec.data.rows() || r.data.cols() != spec.data.cols())
    throw Error("measurements are " + std::to_string(r.data.rows()) + "x" +
                std::to_string(r.data.cols()) + " but the STFT grid is " +
                std::to_string(spec.data.rows()) + "x" +
                std::to_string(spec.data.cols()));
}

void check_sources(std::span<const Measurements> measurements)
{
  if (measurements.size() < 2)
    throw Error("source separation requires at least 2 sources");
  for (const auto& r : measurements) {
    if (r.d != measurements[0].d)
      throw Error("all measurements must share the exponent d");
    if (r.data.rows() != measurements[0].data.rows() ||
        r.data.cols() != measurements[0].data.cols())
      throw Error("all measurements must share the same shape");
  }
}

void check_finite(std::span<const Signal> sources, int iteration)
{
  for (const auto& s : sources)
    if (!s.samples.allFinite()) throw DivergedError(iteration);
}

// S * |S|^(d-2) * Z, the spectrum fed to the adjoint in the gradient.
Eigen::MatrixXcd gradient_spectrum(const ComplexSpectrogram& S,
                                   const Eigen::MatrixXd& r_floored,
                                   const DivergenceSpec& spec, double eps,
                                   int iteration)
{
  const Eigen::MatrixXd mag_d = floored_magnitude_power(S.data, spec.d, eps);
  // Overflowing magnitudes mean the iterate has blown up.
  if (!mag_d.allFinite()) {
    if (iteration > 0) throw DivergedError(iteration);
    throw Error("non-finite STFT magnitude in gradient evaluation");
  }
  const Eigen::MatrixXd z = z_term(spec, r_floored, mag_d);
  if (spec.d == 2) return S.data.cwiseProduct(z.cast<std::complex<double>>());
  const Eigen::MatrixXd inv_mag = S.data.cwiseAbs().cwiseMax(eps).cwiseInverse();
  return S.data.cwiseProduct(
      inv_mag.cwiseProduct(z).cast<std::complex<double>>());
}

// d * A^+(S * |S|^(d-2) * Z): the gradient divided by b. `iteration` > 0
// tags overflow as divergence of that solver iteration.
Signal scaled_gradient(const Signal& s, const Eigen::MatrixXd& r_floored,
                       const DivergenceSpec& spec, const StftConfig& config,
                       double eps, int iteration = 0)
{
  const auto S = stft(s, config);
  if (r_floored.rows() != S.data.rows() || r_floored.cols() != S.data.cols())
    throw Error("measurements do not match the STFT grid of the signal");
  Signal g = istft({gradient_spectrum(S, r_floored, spec, eps, iteration), config},
                   s.size(), s.sample_rate);
  if (spec.d == 2) g.samples *= 2.0;
  return g;
}

} // namespace

void SolverConfig::validate() const
{
  if (iterations < 0) throw Error("iterations must be >= 0");
  if (!(step_size >= 0.0) || !std::isfinite(step_size))
    throw Error("step size must be finite and nonnegative");
  if (!(eps_floor > 0.0)) throw Error("eps_floor must be positive");
  spec.validate();
}

std::vector<Signal> amplitude_mask_init(std::span<const Measurements> measurements,
                                        const Signal& mixture,
                                        const StftConfig& config)
{
  if (mixture.size() == 0) throw Error("empty mixture");
  const auto X = stft(mixture, config);
  const Eigen::MatrixXcd phase = unit_phase(X.data);
  std::vector<Signal> sources;
  sources.reserve(measurements.size());
  for (const auto& r : measurements) {
    r.validate();
    check_grid(r, X);
    const Eigen::MatrixXd mag =
        r.d == 2 ? r.data.cwiseSqrt().eval() : r.data;
    sources.push_back(istft({phase.cwiseProduct(mag.cast<std::complex<double>>()),
                             config},
                            mixture.size(), mixture.sample_rate));
  }
  return sources;
}

Signal griffin_lim(const Measurements& r, const Signal& init, int iterations,
                   const StftConfig& config)
{
  if (r.d != 1) throw Error("Griffin-Lim expects magnitude measurements (d = 1)");
  if (iterations < 0) throw Error("iterations must be >= 0");
  Signal s = init;
  const Eigen::MatrixXcd mag = r.data.cast<std::complex<double>>();
  for (int t = 0; t < iterations; ++t) {
    const auto S = stft(s, config);
    check_grid(r, S);
    s = istft({mag.cwiseProduct(unit_phase(S.data)), config}, s.size(),
              s.sample_rate);
  }
  return s;
}

std::vector<Signal> project_to_mixture(std::span<const Signal> estimates,
                                       const Signal& mixture)
{
  if (estimates.empty()) throw Error("no estimates to project");
  Eigen::VectorXd error = mixture.samples;
  for (const auto& y : estimates) {
    if (y.size() != mixture.size())
      throw Error("estimate length does not match the mixture");
    error -= y.samples;
  }
  error /= static_cast<double>(estimates.size());
  std::vector<Signal> out(estimates.begin(), estimates.end());
  for (auto& s : out) s.samples += error;
  return out;
}

SeparationResult misi(std::span<const Measurements> measurements,
                      const Signal& mixture, int iterations,
                      const StftConfig& config, const SolveOptions& options)
{
  check_sources(measurements);
  if (measurements[0].d != 1)
    throw Error("MISI expects magnitude measurements (d = 1)");
  if (iterations < 0) throw Error("iterations must be >= 0");

  SeparationResult result;
  result.sources = options.init ? *options.init
                                : amplitude_mask_init(measurements, mixture, config);
  if (result.sources.size() != measurements.size())
    throw Error("init must provide one signal per measurement");

  const DivergenceSpec quadratic{2.0, Direction::right, 1};
  const Eigen::VectorXd weights = hermitian_bin_weights(config);
  std::vector<Signal> y(result.sources.size());
  for (int t = 1; t <= iterations; ++t) {
    for (size_t c = 0; c < result.sources.size(); ++c)
      y[c] = griffin_lim(measurements[c], result.sources[c], 1, config);
    result.sources = project_to_mixture(y, mixture);
    check_finite(result.sources, t);
    result.iterations_run = t;
    if (options.record_trace) {
      auto& row = result.objective_trace.emplace_back();
      for (size_t c = 0; c < result.sources.size(); ++c) {
        const auto S = stft(result.sources[c], config);
        row.push_back(objective_from_magnitude(
            quadratic, measurements[c].data,
            floored_magnitude_power(S.data, 1, default_eps_floor), weights));
      }
    }
    if (options.observer) options.observer(t, result.sources);
  }
  return result;
}

Signal grad_J(const Signal& s, const Measurements& r, const DivergenceSpec& spec,
              const StftConfig& config, double eps_floor)
{
  spec.validate();
  if (r.d != spec.d)
    throw Error("measurement exponent does not match the divergence spec");
  Signal g = scaled_gradient(s, floored_measurements(r, eps_floor), spec, config,
                             eps_floor);
  g.samples *= normalization_constant(config);
  return g;
}

SeparationResult projected_gradient(std::span<const Measurements> measurements,
                                    const Signal& mixture,
                                    const SolverConfig& cfg,
                                    const StftConfig& stft_config)
{
  cfg.validate();
  check_sources(measurements);
  if (measurements[0].d != cfg.spec.d)
    throw Error("measurement exponent does not match the divergence spec");

  SeparationResult result;
  result.sources =
      cfg.init ? *cfg.init
               : amplitude_mask_init(measurements, mixture, stft_config);
  if (result.sources.size() != measurements.size())
    throw Error("init must provide one signal per measurement");

  std::vector<Eigen::MatrixXd> targets;
  targets.reserve(measurements.size());
  for (const auto& r : measurements)
    targets.push_back(floored_measurements(r, cfg.eps_floor));
  const Eigen::VectorXd weights = hermitian_bin_weights(stft_config);

  std::vector<Signal> y(result.sources.size());
  for (int t = 1; t <= cfg.iterations; ++t) {
    for (size_t c = 0; c < result.sources.size(); ++c) {
      const Signal g = scaled_gradient(result.sources[c], targets[c], cfg.spec,
                                       stft_config, cfg.eps_floor, t);
      y[c] = result.sources[c];
      y[c].samples -= cfg.step_size * g.samples;
    }
    check_finite(y, t);
    result.sources = project_to_mixture(y, mixture);
    check_finite(result.sources, t);
    result.iterations_run = t;
    if (cfg.record_trace) {
      auto& row = result.objective_trace.emplace_back();
      for (size_t c = 0; c < result.sources.size(); ++c) {
        const auto S = stft(result.sources[c], stft_config);
        const Eigen::MatrixXd mag_d =
            floored_magnitude_power(S.data, cfg.spec.d, cfg.eps_floor);
        if (!mag_d.allFinite()) throw DivergedError(t);
        row.push_back(objective_from_magnitude(cfg.spec, targets[c], mag_d, weights));
      }
    }
    if (cfg.observer) cfg.observer(t, result.sources);
  }
  return result;
}

} // namespace bregpr
