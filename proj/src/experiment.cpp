#include "bregpr/experiment.hpp"

#include "bregpr/error.hpp"
#include "bregpr/metrics.hpp"
#include "bregpr/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace bregpr {

namespace {

std::string format_fixed(double value)
{
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  // Avoid "-0.000000" so sign noise below the printed precision cannot leak.
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line)
{
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& what)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  }
  catch (const std::exception&) {
    throw Error("cannot parse " + what + " '" + text + "'");
  }
}

std::uint64_t parse_u64(const std::string& text, const std::string& what)
{
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  }
  catch (const std::exception&) {
    throw Error("cannot parse " + what + " '" + text + "'");
  }
}

// Fields that identify the noisy-oracle draw; mixing it with the mixture seed
// keeps draws independent across mixtures.
std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b, std::uint64_t c)
{
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

MetricsRow base_row(const Mixture& mixture, const RunSettings& settings)
{
  MetricsRow row;
  row.algo = std::string(to_string(settings.algo));
  row.beta = settings.spec.beta;
  row.d = settings.spec.d;
  row.direction = std::string(to_string(settings.spec.direction));
  row.step_size = settings.step_size;
  row.snr_db = mixture.snr_db;
  row.sigma = settings.provider.mode == ProviderMode::noisy_oracle
                  ? settings.provider.sigma
                  : 0.0;
  row.seed = mixture.seed;
  row.mixture_id = mixture.id;
  row.status = "ok";
  return row;
}

void mark_diverged(MetricsRow& row)
{
  row.status = "diverged";
  row.sdr = std::numeric_limits<double>::quiet_NaN();
  row.sdri = 0.0;
}

} // namespace

// ---------------------------------------------------------------------------

Signal align_noise(const Signal& noise, Eigen::Index length, std::uint64_t seed)
{
  if (noise.size() == 0) throw Error("empty noise signal");
  if (length <= 0) throw Error("target length must be positive");
  std::mt19937_64 rng(seed);
  Signal out{Eigen::VectorXd(length), noise.sample_rate};
  const Eigen::Index n = noise.size();
  if (n >= length) {
    std::uniform_int_distribution<Eigen::Index> pick(0, n - length);
    out.samples = noise.samples.segment(pick(rng), length);
  }
  else {
    // Tile, then crop at a seeded offset within one period.
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    const Eigen::Index offset = pick(rng);
    for (Eigen::Index i = 0; i < length; ++i)
      out.samples[i] = noise.samples[(offset + i) % n];
  }
  return out;
}

std::pair<Signal, Signal> mix_at_snr(const Signal& speech, const Signal& noise,
                                     double snr_db)
{
  if (speech.size() != noise.size())
    throw Error("speech and noise lengths differ; align the noise first");
  if (!std::isfinite(snr_db)) throw Error("snr_db must be finite");
  const double speech_norm = speech.samples.norm();
  const double noise_norm = noise.samples.norm();
  if (speech_norm == 0.0) throw Error("speech has zero energy");
  if (noise_norm == 0.0) throw Error("noise has zero energy");
  const double alpha =
      (speech_norm / noise_norm) * std::pow(10.0, -snr_db / 20.0);
  Signal scaled{alpha * noise.samples, speech.sample_rate};
  Signal mixture{speech.samples + scaled.samples, speech.sample_rate};
  return {std::move(mixture), std::move(scaled)};
}

Mixture make_mixture(std::string id, const Signal& speech, const Signal& noise,
                     double snr_db, std::uint64_t seed)
{
  if (speech.sample_rate != noise.sample_rate)
    throw Error("speech and noise sample rates differ");
  const Signal aligned = align_noise(noise, speech.size(), seed);
  auto [mix, scaled] = mix_at_snr(speech, aligned, snr_db);
  return {std::move(id), snr_db, seed, speech, std::move(scaled), std::move(mix)};
}

Mixture load_mixture(const MixSpec& spec, std::string id)
{
  return make_mixture(std::move(id), load_wav(spec.speech_path),
                      load_wav(spec.noise_path), spec.snr_db, spec.seed);
}

// ---------------------------------------------------------------------------

ProviderMode parse_provider(std::string_view name)
{
  if (name == "oracle") return ProviderMode::oracle;
  if (name == "noisy_oracle") return ProviderMode::noisy_oracle;
  throw Error("unknown provider '" + std::string(name) + "'");
}

std::string_view to_string(ProviderMode mode)
{
  return mode == ProviderMode::oracle ? "oracle" : "noisy_oracle";
}

std::vector<Measurements> provide_spectrograms(std::span<const Signal> sources,
                                               const ProviderSpec& provider,
                                               int d, const StftConfig& config)
{
  if (sources.empty()) throw Error("no sources to build measurements from");
  if (d != 1 && d != 2) throw Error("exponent d must be 1 or 2");
  if (!(provider.sigma >= 0.0)) throw Error("sigma must be >= 0");
  std::vector<Measurements> out;
  out.reserve(sources.size());
  for (std::size_t c = 0; c < sources.size(); ++c) {
    Eigen::MatrixXd mag = stft(sources[c], config).data.cwiseAbs();
    if (provider.mode == ProviderMode::noisy_oracle && provider.sigma > 0.0) {
      std::mt19937_64 rng(mix_seeds(provider.seed, c, 0x6e6f697379ULL));
      std::normal_distribution<double> normal(0.0, 1.0);
      // Column-major fill order is part of the determinism contract.
      for (Eigen::Index j = 0; j < mag.cols(); ++j)
        for (Eigen::Index k = 0; k < mag.rows(); ++k)
          mag(k, j) *= std::exp(provider.sigma * normal(rng));
    }
    if (d == 2) mag = mag.array().square().matrix();
    out.push_back({std::move(mag), d});
  }
  return out;
}

// ---------------------------------------------------------------------------

Algorithm parse_algorithm(std::string_view name)
{
  if (name == "amplitude_mask") return Algorithm::amplitude_mask;
  if (name == "gl") return Algorithm::gl;
  if (name == "misi") return Algorithm::misi;
  if (name == "pgd") return Algorithm::pgd;
  throw Error("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm algo)
{
  switch (algo) {
  case Algorithm::amplitude_mask: return "amplitude_mask";
  case Algorithm::gl: return "gl";
  case Algorithm::misi: return "misi";
  case Algorithm::pgd: return "pgd";
  }
  return "?";
}

std::uint64_t provider_seed_for(const ProviderSpec& provider,
                                const Mixture& mixture)
{
  return mix_seeds(provider.seed, mixture.seed, 0x6d6978ULL);
}

SeparationRun run_separation(const Mixture& mixture, const RunSettings& settings)
{
  settings.spec.validate();
  if ((settings.algo == Algorithm::gl || settings.algo == Algorithm::misi) &&
      settings.spec.d != 1)
    throw Error(std::string(to_string(settings.algo)) +
                " requires magnitude measurements (d = 1)");

  ProviderSpec provider = settings.provider;
  provider.seed = provider_seed_for(settings.provider, mixture);
  const std::vector<Signal> truth{mixture.speech, mixture.noise};
  const auto measurements =
      provide_spectrograms(truth, provider, settings.spec.d, settings.stft);
  const auto init =
      amplitude_mask_init(measurements, mixture.mixture, settings.stft);

  SeparationRun run;
  run.row = base_row(mixture, settings);
  run.row.sdr_init = sdr(mixture.speech, init[0]);

  try {
    switch (settings.algo) {
    case Algorithm::amplitude_mask:
      run.sources = init;
      break;
    case Algorithm::gl:
      for (std::size_t c = 0; c < init.size(); ++c)
        run.sources.push_back(griffin_lim(measurements[c], init[c],
                                          settings.iterations, settings.stft));
      for (const auto& s : run.sources)
        if (!s.samples.allFinite()) throw DivergedError(settings.iterations);
      break;
    case Algorithm::misi: {
      SolveOptions options;
      options.init = init;
      run.sources = misi(measurements, mixture.mixture, settings.iterations,
                         settings.stft, options)
                        .sources;
      break;
    }
    case Algorithm::pgd: {
      SolverConfig cfg;
      cfg.iterations = settings.iterations;
      cfg.step_size = settings.step_size;
      cfg.spec = settings.spec;
      cfg.init = init;
      run.sources =
          projected_gradient(measurements, mixture.mixture, cfg, settings.stft)
              .sources;
      break;
    }
    }
  }
  catch (const DivergedError&) {
    mark_diverged(run.row);
    run.sources.clear();
    return run;
  }
  run.row.sdr = sdr(mixture.speech, run.sources[0]);
  run.row.sdri = run.row.sdr - run.row.sdr_init;
  return run;
}

std::string format_csv(std::vector<MetricsRow> rows)
{
  std::stable_sort(rows.begin(), rows.end(),
                   [](const MetricsRow& a, const MetricsRow& b) {
                     return std::tie(a.mixture_id, a.beta, a.step_size, a.d,
                                     a.direction) <
                            std::tie(b.mixture_id, b.beta, b.step_size, b.d,
                                     b.direction);
                   });
  std::string out(csv_header);
  out += '\n';
  for (const auto& r : rows) {
    out += r.algo + ',' + format_fixed(r.beta) + ',' + std::to_string(r.d) +
           ',' + r.direction + ',' + format_fixed(r.step_size) + ',' +
           format_fixed(r.snr_db) + ',' + format_fixed(r.sigma) + ',' +
           std::to_string(r.seed) + ',' + r.mixture_id + ',' + r.status + ',' +
           format_fixed(r.sdr_init) + ',' + format_fixed(r.sdr) + ',' +
           format_fixed(r.sdri) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         std::optional<std::string> split)
{
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::string line;
  std::vector<std::string> header;
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' ||
        line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto fields = split_csv_line(line);
    if (header.empty()) {
      header = fields;
      const std::vector<std::string> expected{"mixture_id", "speech", "noise",
                                              "snr_db",     "seed",   "split"};
      if (header != expected)
        throw Error("manifest header must be mixture_id,speech,noise,snr_db,"
                    "seed,split");
      continue;
    }
    if (fields.size() != header.size())
      throw Error("manifest row has " + std::to_string(fields.size()) +
                  " fields, expected " + std::to_string(header.size()));
    ManifestEntry e;
    e.mixture_id = fields[0];
    e.speech = fields[1];
    e.noise = fields[2];
    if (e.speech.is_relative()) e.speech = base / e.speech;
    if (e.noise.is_relative()) e.noise = base / e.noise;
    e.snr_db = parse_double(fields[3], "snr_db");
    e.seed = parse_u64(fields[4], "seed");
    e.split = fields[5];
    if (!split || e.split == *split) entries.push_back(std::move(e));
  }
  if (entries.empty())
    throw Error("manifest " + path.string() + " has no usable rows" +
                (split ? " for split '" + *split + "'" : std::string()));
  return entries;
}

SweepSpec SweepSpec::defaults()
{
  SweepSpec s;
  for (int k = 0; k <= 8; ++k) s.betas.push_back(0.25 * k);
  for (int k = 0; k <= 8; ++k) s.step_sizes.push_back(std::pow(10.0, -4.0 + 0.5 * k));
  s.directions = {Direction::right, Direction::left};
  s.d_values = {1, 2};
  s.iterations = 5;
  return s;
}

void SweepSpec::validate() const
{
  if (betas.empty() || step_sizes.empty() || directions.empty() ||
      d_values.empty())
    throw Error("sweep lists must be non-empty");
  for (double b : betas)
    if (!(b >= 0.0 && b <= 2.0)) throw Error("sweep betas must lie in [0, 2]");
  for (double mu : step_sizes)
    if (!(mu > 0.0)) throw Error("sweep step sizes must be positive");
  for (int d : d_values)
    if (d != 1 && d != 2) throw Error("sweep d values must be 1 or 2");
  if (iterations < 0) throw Error("iterations must be >= 0");
}

SweepResult run_sweep(std::span<const Mixture> mixtures, const SweepSpec& sweep,
                      const ProviderSpec& provider, const StftConfig& stft,
                      std::span<const CellSummary> restrict_steps)
{
  sweep.validate();
  if (mixtures.empty()) throw Error("sweep needs at least one mixture");

  auto allowed = [&](double beta, int d, Direction dir, double mu) {
    if (restrict_steps.empty()) return true;
    return std::any_of(restrict_steps.begin(), restrict_steps.end(),
                       [&](const CellSummary& c) {
                         return c.beta == beta && c.d == d && c.direction == dir &&
                                c.step_size == mu;
                       });
  };

  SweepResult result;
  using CellKey = std::tuple<double, int, int, double>;
  std::map<CellKey, CellSummary> cells;

  for (const auto& mixture : mixtures) {
    ProviderSpec mix_provider = provider;
    mix_provider.seed = provider_seed_for(provider, mixture);
    const std::vector<Signal> truth{mixture.speech, mixture.noise};
    for (int d : sweep.d_values) {
      const auto measurements = provide_spectrograms(truth, mix_provider, d, stft);
      const auto init = amplitude_mask_init(measurements, mixture.mixture, stft);
      const double sdr_init = sdr(mixture.speech, init[0]);
      for (double beta : sweep.betas) {
        for (Direction dir : sweep.directions) {
          for (double mu : sweep.step_sizes) {
            if (!allowed(beta, d, dir, mu)) continue;
            RunSettings settings;
            settings.algo = Algorithm::pgd;
            settings.spec = {beta, dir, d};
            settings.step_size = mu;
            settings.iterations = sweep.iterations;
            settings.provider = provider;
            settings.stft = stft;

            MetricsRow row = base_row(mixture, settings);
            row.sdr_init = sdr_init;
            SolverConfig cfg;
            cfg.iterations = sweep.iterations;
            cfg.step_size = mu;
            cfg.spec = settings.spec;
            cfg.init = init;
            try {
              const auto out =
                  projected_gradient(measurements, mixture.mixture, cfg, stft);
              row.sdr = sdr(mixture.speech, out.sources[0]);
              row.sdri = row.sdr - row.sdr_init;
            }
            catch (const DivergedError&) {
              mark_diverged(row);
            }

            auto& cell = cells[{beta, d, static_cast<int>(dir), mu}];
            cell.beta = beta;
            cell.d = d;
            cell.direction = dir;
            cell.step_size = mu;
            cell.mean_sdri += row.sdri;
            if (row.status == "diverged") ++cell.diverged;
            result.rows.push_back(std::move(row));
          }
        }
      }
    }
  }

  const double count = static_cast<double>(mixtures.size());
  std::map<std::tuple<double, int, int>, CellSummary> best;
  for (auto& [key, cell] : cells) {
    cell.mean_sdri /= count;
    result.cells.push_back(cell);
    const auto bkey = std::make_tuple(cell.beta, cell.d, static_cast<int>(cell.direction));
    auto it = best.find(bkey);
    // Ties keep the smaller step size (cells iterate in increasing order).
    if (it == best.end() || cell.mean_sdri > it->second.mean_sdri)
      best[bkey] = cell;
  }
  for (const auto& [key, cell] : best) result.best.push_back(cell);
  return result;
}

std::string format_summary(std::span<const CellSummary> best)
{
  std::string out = "beta,d,direction,best_step_size,mean_sdri,diverged\n";
  for (const auto& c : best) {
    out += format_fixed(c.beta) + ',' + std::to_string(c.d) + ',' +
           std::string(to_string(c.direction)) + ',';
    char buf[64];
    // Full precision so the value round-trips into a test-split run.
    std::snprintf(buf, sizeof buf, "%.17g", c.step_size);
    out += std::string(buf) + ',' + format_fixed(c.mean_sdri) + ',' +
           std::to_string(c.diverged) + '\n';
  }
  return out;
}

std::vector<CellSummary> parse_summary(const std::string& text)
{
  std::stringstream ss(text);
  std::string line;
  std::vector<CellSummary> out;
  bool header = true;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw Error("malformed summary row: " + line);
    CellSummary c;
    c.beta = parse_double(f[0], "beta");
    c.d = static_cast<int>(parse_u64(f[1], "d"));
    c.direction = parse_direction(f[2]);
    c.step_size = parse_double(f[3], "step size");
    c.mean_sdri = parse_double(f[4], "mean_sdri");
    c.diverged = static_cast<int>(parse_u64(f[5], "diverged"));
    out.push_back(c);
  }
  return out;
}

} // namespace bregpr
