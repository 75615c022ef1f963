// Command-line front end: mixing, separation, step-size/beta sweeps, SDR.
#include "bregpr/error.hpp"
#include "bregpr/experiment.hpp"
#include "bregpr/metrics.hpp"
#include "bregpr/wav.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace bregpr;

namespace {

struct CommonOptions
{
  std::string speech;
  std::string noise;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int win = 1024;
  int hop = 256;
  std::string csv;
};

void add_stft_options(CLI::App* cmd, CommonOptions& o)
{
  cmd->add_option("--win", o.win, "Window length in samples")->capture_default_str();
  cmd->add_option("--hop", o.hop, "Hop size in samples")->capture_default_str();
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Phase recovery with beta-divergences for source separation"};
  app.set_config("--config", "", "key=value config file ([subcommand] sections)");
  app.require_subcommand(1);

  // mix ---------------------------------------------------------------------
  CommonOptions mix_opts;
  std::string mix_out = ".";
  auto* mix = app.add_subcommand("mix", "Mix speech and noise at a target SNR");
  mix->add_option("--speech", mix_opts.speech, "Clean speech WAV")->required();
  mix->add_option("--noise", mix_opts.noise, "Noise WAV")->required();
  mix->add_option("--snr", mix_opts.snr_db, "Input SNR in dB")->capture_default_str();
  mix->add_option("--seed", mix_opts.seed, "Noise crop seed")->capture_default_str();
  mix->add_option("--out-dir", mix_out, "Output directory")->capture_default_str();

  // separate ----------------------------------------------------------------
  CommonOptions sep_opts;
  std::string algo = "pgd", direction = "right", provider = "oracle",
              sep_out;
  double beta = 2.0, step_size = 1.0, sigma = 0.0;
  int d = 1, iterations = 5;
  std::uint64_t provider_seed = 0;
  auto* sep = app.add_subcommand("separate", "Run one separation and report SDR");
  sep->add_option("--speech", sep_opts.speech, "Clean speech WAV")->required();
  sep->add_option("--noise", sep_opts.noise, "Noise WAV")->required();
  sep->add_option("--snr", sep_opts.snr_db, "Input SNR in dB")->capture_default_str();
  sep->add_option("--seed", sep_opts.seed, "Noise crop seed")->capture_default_str();
  sep->add_option("--algo", algo, "amplitude_mask|gl|misi|pgd")
      ->check(CLI::IsMember({"amplitude_mask", "gl", "misi", "pgd"}))
      ->capture_default_str();
  sep->add_option("--beta", beta, "Beta in [0, 2]")->capture_default_str();
  sep->add_option("--d", d, "1 (magnitude) or 2 (power)")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  sep->add_option("--direction", direction, "right|left")
      ->check(CLI::IsMember({"right", "left"}))
      ->capture_default_str();
  sep->add_option("--step-size", step_size, "Normalized step size")->capture_default_str();
  sep->add_option("--iterations", iterations, "Iterations")->capture_default_str();
  sep->add_option("--provider", provider, "oracle|noisy_oracle")
      ->check(CLI::IsMember({"oracle", "noisy_oracle"}))
      ->capture_default_str();
  sep->add_option("--sigma", sigma, "Log-domain perturbation (noisy_oracle)")
      ->capture_default_str();
  sep->add_option("--provider-seed", provider_seed, "Seed of the perturbation")
      ->capture_default_str();
  sep->add_option("--csv", sep_opts.csv, "Append the metrics row to this CSV");
  sep->add_option("--out-dir", sep_out, "Write speech_est.wav / noise_est.wav here");
  add_stft_options(sep, sep_opts);

  // sweep -------------------------------------------------------------------
  CommonOptions sweep_opts;
  std::string manifest, split, tuned, summary_path;
  SweepSpec sweep_spec = SweepSpec::defaults();
  std::vector<std::string> sweep_dirs{"right", "left"};
  std::string sweep_provider = "noisy_oracle";
  double sweep_sigma = 0.5;
  std::uint64_t sweep_provider_seed = 0;
  auto* sw = app.add_subcommand("sweep", "Sweep beta / step size over a manifest");
  sw->add_option("--manifest", manifest, "CSV: mixture_id,speech,noise,snr_db,seed,split")
      ->required();
  sw->add_option("--split", split, "Only use rows of this split")
      ->check(CLI::IsMember({"validation", "test"}));
  sw->add_option("--betas", sweep_spec.betas, "Beta grid")->delimiter(',');
  sw->add_option("--step-sizes", sweep_spec.step_sizes, "Step-size grid")->delimiter(',');
  sw->add_option("--directions", sweep_dirs, "Subset of right,left")
      ->delimiter(',')
      ->check(CLI::IsMember({"right", "left"}));
  sw->add_option("--d", sweep_spec.d_values, "Subset of 1,2")->delimiter(',');
  sw->add_option("--iterations", sweep_spec.iterations, "Iterations")->capture_default_str();
  sw->add_option("--provider", sweep_provider, "oracle|noisy_oracle")
      ->check(CLI::IsMember({"oracle", "noisy_oracle"}))
      ->capture_default_str();
  sw->add_option("--sigma", sweep_sigma, "Log-domain perturbation")->capture_default_str();
  sw->add_option("--seed", sweep_provider_seed, "Provider seed")->capture_default_str();
  sw->add_option("--tuned", tuned,
                 "Summary CSV of a validation sweep; restricts each cell to its "
                 "best step size");
  sw->add_option("--csv", sweep_opts.csv, "Per-mixture results CSV (stdout if unset)");
  sw->add_option("--summary", summary_path, "Best step size per cell (stdout if unset)");
  add_stft_options(sw, sweep_opts);

  // eval --------------------------------------------------------------------
  std::string reference, estimate, baseline;
  auto* ev = app.add_subcommand("eval", "SDR (and SDRi) between WAV files");
  ev->add_option("--reference", reference, "Reference WAV")->required();
  ev->add_option("--estimate", estimate, "Estimate WAV")->required();
  ev->add_option("--baseline", baseline, "Baseline WAV for SDRi");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mix) {
      const auto m = load_mixture({mix_opts.speech, mix_opts.noise,
                                   mix_opts.snr_db, mix_opts.seed});
      fs::create_directories(mix_out);
      write_wav(fs::path(mix_out) / "mixture.wav", m.mixture);
      write_wav(fs::path(mix_out) / "speech.wav", m.speech);
      write_wav(fs::path(mix_out) / "noise.wav", m.noise);
      const double achieved = 10.0 * std::log10(m.speech.samples.squaredNorm() /
                                                m.noise.samples.squaredNorm());
      std::printf("snr_db=%.6f\n", achieved);
    }
    else if (*sep) {
      RunSettings settings;
      settings.algo = parse_algorithm(algo);
      settings.spec = {beta, parse_direction(direction), d};
      settings.step_size = step_size;
      settings.iterations = iterations;
      settings.provider = {parse_provider(provider), sigma, provider_seed};
      settings.stft = StftConfig::hann(sep_opts.win, sep_opts.hop);
      const auto m = load_mixture({sep_opts.speech, sep_opts.noise,
                                   sep_opts.snr_db, sep_opts.seed});
      const auto run = run_separation(m, settings);
      const std::string csv = format_csv({run.row});
      std::cout << csv;
      if (!sep_opts.csv.empty()) write_text(sep_opts.csv, csv);
      if (!sep_out.empty() && !run.sources.empty()) {
        fs::create_directories(sep_out);
        write_wav(fs::path(sep_out) / "speech_est.wav", run.sources[0]);
        write_wav(fs::path(sep_out) / "noise_est.wav", run.sources[1]);
        write_wav(fs::path(sep_out) / "mixture.wav", m.mixture);
      }
    }
    else if (*sw) {
      sweep_spec.directions.clear();
      for (const auto& name : sweep_dirs)
        sweep_spec.directions.push_back(parse_direction(name));
      const auto entries =
          load_manifest(manifest, split.empty() ? std::nullopt
                                                : std::optional<std::string>(split));
      std::vector<Mixture> mixtures;
      for (const auto& e : entries)
        mixtures.push_back(
            load_mixture({e.speech, e.noise, e.snr_db, e.seed}, e.mixture_id));
      std::vector<CellSummary> restrict_steps;
      if (!tuned.empty()) {
        restrict_steps = parse_summary(read_text(tuned));
        for (const auto& c : restrict_steps) {
          auto& steps = sweep_spec.step_sizes;
          if (std::find(steps.begin(), steps.end(), c.step_size) == steps.end())
            steps.push_back(c.step_size);
        }
      }
      const auto result = run_sweep(
          mixtures, sweep_spec,
          {parse_provider(sweep_provider), sweep_sigma, sweep_provider_seed},
          StftConfig::hann(sweep_opts.win, sweep_opts.hop), restrict_steps);
      const std::string csv = format_csv(result.rows);
      const std::string summary = format_summary(result.best);
      if (sweep_opts.csv.empty()) std::cout << csv;
      else write_text(sweep_opts.csv, csv);
      if (summary_path.empty()) std::cout << summary;
      else write_text(summary_path, summary);
    }
    else if (*ev) {
      const Signal ref = load_wav(reference);
      const Signal est = load_wav(estimate);
      std::printf("sdr=%.6f\n", sdr(ref, est));
      if (!baseline.empty())
        std::printf("sdri=%.6f\n", sdri(ref, est, load_wav(baseline)));
    }
  }
  catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
