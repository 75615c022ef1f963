#pragma once

#include "bregpr/solvers.hpp"
#include "bregpr/stft.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bregpr {

// ---------------------------------------------------------------------------
// Mixing

struct MixSpec
{
  std::filesystem::path speech_path;
  std::filesystem::path noise_path;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

/// A speech + noise mixture with its ground-truth sources.
struct Mixture
{
  std::string id;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  Signal speech;
  Signal noise; ///< scaled to the requested SNR
  Signal mixture;
};

/// Crops `noise` to `length` samples at a seeded offset, tiling it first when
/// it is shorter than `length`.
Signal align_noise(const Signal& noise, Eigen::Index length, std::uint64_t seed);

/// Scales `noise` so that 10 log10(||speech||^2 / ||scaled||^2) = snr_db.
/// Returns (mixture, scaled_noise).
std::pair<Signal, Signal> mix_at_snr(const Signal& speech, const Signal& noise,
                                     double snr_db);

/// Aligns and mixes two in-memory signals.
Mixture make_mixture(std::string id, const Signal& speech, const Signal& noise,
                     double snr_db, std::uint64_t seed);

/// Loads the WAV pair named by `spec` and mixes it.
Mixture load_mixture(const MixSpec& spec, std::string id = "0");

// ---------------------------------------------------------------------------
// Spectrogram providers (stand-ins for a learned magnitude estimator)

enum class ProviderMode
{
  oracle,
  noisy_oracle,
};

ProviderMode parse_provider(std::string_view name);
std::string_view to_string(ProviderMode mode);

struct ProviderSpec
{
  ProviderMode mode = ProviderMode::oracle;
  /// Log-domain perturbation scale (noisy_oracle only).
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// oracle: |STFT(s_c)|^d. noisy_oracle: (|STFT(s_c)| * exp(sigma G_c))^d with
/// G_c i.i.d. standard normal drawn from (seed, c).
std::vector<Measurements> provide_spectrograms(std::span<const Signal> sources,
                                               const ProviderSpec& provider,
                                               int d, const StftConfig& config);

// ---------------------------------------------------------------------------
// Separation runs and reporting

enum class Algorithm
{
  amplitude_mask,
  gl,
  misi,
  pgd,
};

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algo);

struct RunSettings
{
  Algorithm algo = Algorithm::pgd;
  DivergenceSpec spec;
  double step_size = 1.0;
  int iterations = 5;
  ProviderSpec provider;
  StftConfig stft = StftConfig::hann(1024, 256);
};

/// One line of the results CSV.
struct MetricsRow
{
  std::string algo;
  double beta = 0.0;
  int d = 1;
  std::string direction;
  double step_size = 0.0;
  double snr_db = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string mixture_id;
  std::string status; ///< "ok" or "diverged"
  double sdr_init = 0.0;
  double sdr = 0.0;  ///< NaN when diverged
  double sdri = 0.0; ///< 0 when diverged
};

struct SeparationRun
{
  MetricsRow row;
  std::vector<Signal> sources; ///< empty when diverged
};

/// Seed of the noisy-oracle field for one mixture.
std::uint64_t provider_seed_for(const ProviderSpec& provider,
                                const Mixture& mixture);

/// Builds measurements for (speech, noise), runs the selected algorithm, and
/// scores the speech estimate against the amplitude-masking baseline.
SeparationRun run_separation(const Mixture& mixture, const RunSettings& settings);

inline constexpr std::string_view csv_header =
    "algo,beta,d,direction,step_size,snr_db,sigma,seed,mixture_id,status,"
    "sdr_init,sdr,sdri";

/// Rows sorted by (mixture_id, beta, step_size, d, direction), header first,
/// floats with 6 decimals.
std::string format_csv(std::vector<MetricsRow> rows);

// ---------------------------------------------------------------------------
// Sweeps

struct ManifestEntry
{
  std::string mixture_id;
  std::filesystem::path speech;
  std::filesystem::path noise;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  std::string split;
};

/// CSV with header `mixture_id,speech,noise,snr_db,seed,split`. Relative paths
/// resolve against the manifest's directory. Rows whose split differs from
/// `split` are dropped when `split` is set.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         std::optional<std::string> split = {});

struct SweepSpec
{
  std::vector<double> betas;
  std::vector<double> step_sizes;
  std::vector<Direction> directions;
  std::vector<int> d_values;
  int iterations = 5;

  /// beta 0..2 step 0.25, step sizes 1e-4..1 (9 log-spaced), both
  /// directions, d in {1, 2}, 5 iterations.
  static SweepSpec defaults();
  void validate() const;
};

/// Mean SDRi of one (beta, d, direction, step size) cell.
struct CellSummary
{
  double beta = 0.0;
  int d = 1;
  Direction direction = Direction::right;
  double step_size = 0.0;
  double mean_sdri = 0.0;
  int diverged = 0;
};

struct SweepResult
{
  std::vector<MetricsRow> rows;
  std::vector<CellSummary> cells;
  /// Best step size per (beta, d, direction).
  std::vector<CellSummary> best;
};

/// Runs projected gradient descent for every cell of `sweep` on every mixture.
/// `restrict_steps`, when given, limits each (beta, d, direction) to the step
/// sizes listed for it (e.g. the best cells of a validation sweep).
SweepResult run_sweep(std::span<const Mixture> mixtures, const SweepSpec& sweep,
                      const ProviderSpec& provider, const StftConfig& stft,
                      std::span<const CellSummary> restrict_steps = {});

/// `beta,d,direction,best_step_size,mean_sdri,diverged`
std::string format_summary(std::span<const CellSummary> best);
std::vector<CellSummary> parse_summary(const std::string& text);

} // namespace bregpr
