#pragma once

#include "bregpr/divergence.hpp"
#include "bregpr/stft.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace bregpr {

/// Called after each completed iteration (1-based) with the current sources.
using IterationObserver =
    std::function<void(int iteration, std::span<const Signal> sources)>;

/// Options shared by the mixture-constrained solvers.
struct SolveOptions
{
  /// Starting point; amplitude masking of the mixture when empty.
  std::optional<std::vector<Signal>> init;
  bool record_trace = false;
  IterationObserver observer;
};

struct SolverConfig
{
  int iterations = 5;
  /// Normalized step size (step divided by the normalization constant).
  double step_size = 1.0;
  DivergenceSpec spec;
  double eps_floor = default_eps_floor;
  bool record_trace = false;
  std::optional<std::vector<Signal>> init;
  IterationObserver observer;

  void validate() const;
};

struct SeparationResult
{
  std::vector<Signal> sources;
  /// objective_trace[t][c]: objective of source c after iteration t + 1.
  std::vector<std::vector<double>> objective_trace;
  int iterations_run = 0;
};

/// Pairs each source's target magnitude r_c^(1/d) with the mixture phase.
std::vector<Signal> amplitude_mask_init(std::span<const Measurements> measurements,
                                        const Signal& mixture,
                                        const StftConfig& config);

/// s <- A^+(r * As / |As|), unit phase factor 1 at zero-magnitude bins.
Signal griffin_lim(const Measurements& r, const Signal& init, int iterations,
                   const StftConfig& config);

/// s_c = y_c + (x - sum_i y_i) / C.
std::vector<Signal> project_to_mixture(std::span<const Signal> estimates,
                                       const Signal& mixture);

/// Multiple input spectrogram inversion: per-source Griffin-Lim step followed
/// by redistribution of the mixing error.
SeparationResult misi(std::span<const Measurements> measurements,
                      const Signal& mixture, int iterations,
                      const StftConfig& config, const SolveOptions& options = {});

/// Gradient of the objective with respect to the time-domain signal.
Signal grad_J(const Signal& s, const Measurements& r, const DivergenceSpec& spec,
              const StftConfig& config, double eps_floor = default_eps_floor);

/// Projected gradient descent on sum_c J_c subject to sum_c s_c = x.
/// Throws DivergedError when an iterate becomes non-finite.
SeparationResult projected_gradient(std::span<const Measurements> measurements,
                                    const Signal& mixture,
                                    const SolverConfig& cfg,
                                    const StftConfig& stft_config);

} // namespace bregpr
