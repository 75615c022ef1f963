#include "bregpr/stft.hpp"

#include "bregpr/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace bregpr {

namespace {

template <typename T>
struct FftwFree
{
  void operator()(T* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T, FftwFree<T>>;

FftwBuffer<double> allocate_real(int n)
{
  return FftwBuffer<double>(fftw_alloc_real(static_cast<size_t>(n)));
}

FftwBuffer<fftw_complex> allocate_complex(int n)
{
  return FftwBuffer<fftw_complex>(fftw_alloc_complex(static_cast<size_t>(n)));
}

// Plans are created once per size and shared. Only plan creation touches
// FFTW's global planner state, so it is serialized; execution through the
// new-array interface is thread-safe.
struct PlanPair
{
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const PlanPair& plans_for(int n)
{
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto real = allocate_real(n);
  auto spectrum = allocate_complex(n / 2 + 1);
  PlanPair pair;
  pair.forward = fftw_plan_dft_r2c_1d(n, real.get(), spectrum.get(),
                                      FFTW_ESTIMATE);
  pair.inverse = fftw_plan_dft_c2r_1d(n, spectrum.get(), real.get(),
                                      FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  if (!pair.forward || !pair.inverse)
    throw Error("FFTW planning failed for size " + std::to_string(n));
  return cache.emplace(n, pair).first->second;
}

} // namespace

void Signal::validate() const
{
  if (sample_rate <= 0) throw Error("sample_rate must be positive");
  if (!samples.allFinite()) throw Error("signal contains non-finite samples");
}

void StftConfig::validate() const
{
  if (win_length < 2) throw Error("win_length must be >= 2");
  if (hop <= 0 || hop > win_length)
    throw Error("hop must be in [1, win_length]");
  if (win_length % hop != 0)
    throw Error("win_length must be a multiple of hop");
  if (fft_size != win_length)
    throw Error("fft_size must equal win_length (no zero-padding)");
}

int StftConfig::num_frames(Eigen::Index length) const
{
  const auto ceil_frames = static_cast<int>((length + hop - 1) / hop);
  return ceil_frames + win_length / hop - 1;
}

void Measurements::validate() const
{
  if (d != 1 && d != 2) throw Error("exponent d must be 1 or 2");
  if ((data.array() < 0.0).any() || !data.allFinite())
    throw Error("measurements must be finite and nonnegative");
}

std::vector<double> make_window(WindowKind kind, int length)
{
  if (length < 2) throw Error("window length must be >= 2");
  if (kind != WindowKind::hann_periodic) throw Error("unsupported window kind");
  std::vector<double> w(static_cast<size_t>(length));
  for (int n = 0; n < length; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  return w;
}

ComplexSpectrogram stft(const Signal& signal, const StftConfig& config)
{
  config.validate();
  const Eigen::Index length = signal.size();
  if (length == 0) throw Error("stft of an empty signal");

  const int n = config.fft_size;
  const int bins = config.num_bins();
  const int frames = config.num_frames(length);
  const int pad = config.padding();
  const auto window = make_window(config.window_kind, config.win_length);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const PlanPair& plan = plans_for(n);

  auto frame = allocate_real(n);
  auto spectrum = allocate_complex(bins);

  ComplexSpectrogram out{Eigen::MatrixXcd(bins, frames), config};
  for (int j = 0; j < frames; ++j) {
    const Eigen::Index start = static_cast<Eigen::Index>(j) * config.hop - pad;
    for (int t = 0; t < n; ++t) {
      const Eigen::Index idx = start + t;
      frame.get()[t] =
          (idx >= 0 && idx < length) ? window[t] * signal.samples[idx] : 0.0;
    }
    fftw_execute_dft_r2c(plan.forward, frame.get(), spectrum.get());
    for (int k = 0; k < bins; ++k)
      out.data(k, j) = std::complex<double>(spectrum.get()[k][0],
                                            spectrum.get()[k][1]) *
                       scale;
  }
  return out;
}

Signal istft(const ComplexSpectrogram& spec, Eigen::Index target_length,
             int sample_rate)
{
  const StftConfig& config = spec.config;
  config.validate();
  if (spec.data.rows() != config.num_bins())
    throw Error("spectrogram has " + std::to_string(spec.data.rows()) +
                " bins, config expects " + std::to_string(config.num_bins()));
  if (target_length < 0) throw Error("negative target length");

  const int n = config.fft_size;
  const int bins = config.num_bins();
  const auto frames = spec.data.cols();
  const int pad = config.padding();
  const auto window = make_window(config.window_kind, config.win_length);
  const double scale =
      1.0 / (std::sqrt(static_cast<double>(n)) * normalization_constant(config));
  const PlanPair& plan = plans_for(n);

  auto frame = allocate_real(n);
  auto spectrum = allocate_complex(bins);

  Signal out{Eigen::VectorXd::Zero(target_length), sample_rate};
  for (Eigen::Index j = 0; j < frames; ++j) {
    for (int k = 0; k < bins; ++k) {
      spectrum.get()[k][0] = spec.data(k, j).real();
      spectrum.get()[k][1] = spec.data(k, j).imag();
    }
    // The half-complex inverse assumes a real signal, so these parts vanish.
    spectrum.get()[0][1] = 0.0;
    if (n % 2 == 0) spectrum.get()[bins - 1][1] = 0.0;
    fftw_execute_dft_c2r(plan.inverse, spectrum.get(), frame.get());

    const Eigen::Index start = j * config.hop - pad;
    const Eigen::Index first = std::max<Eigen::Index>(0, -start);
    const Eigen::Index last = std::min<Eigen::Index>(n, target_length - start);
    for (Eigen::Index t = first; t < last; ++t)
      out.samples[start + t] += window[t] * frame.get()[t] * scale;
  }
  return out;
}

std::vector<double> squared_overlap_sum(const StftConfig& config)
{
  config.validate();
  const auto window = make_window(config.window_kind, config.win_length);
  std::vector<double> sums(static_cast<size_t>(config.hop), 0.0);
  for (int t = 0; t < config.win_length; ++t)
    sums[t % config.hop] += window[t] * window[t];
  return sums;
}

double normalization_constant(const StftConfig& config)
{
  const auto sums = squared_overlap_sum(config);
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  if (*hi - *lo > 1e-12 * std::max(1.0, *hi))
    throw Error("window is not COLA under squared overlap-add (sum varies in [" +
                std::to_string(*lo) + ", " + std::to_string(*hi) + "])");
  double mean = 0.0;
  for (double s : sums) mean += s;
  mean /= static_cast<double>(sums.size());
  if (!(mean > 0.0)) throw Error("zero normalization constant");
  return mean;
}

Measurements magnitude_power(const ComplexSpectrogram& spec, int d)
{
  if (d != 1 && d != 2) throw Error("exponent d must be 1 or 2");
  Measurements out{spec.data.cwiseAbs(), d};
  if (d == 2) out.data = out.data.array().square().matrix();
  return out;
}

Eigen::VectorXd hermitian_bin_weights(const StftConfig& config)
{
  Eigen::VectorXd w = Eigen::VectorXd::Constant(config.num_bins(), 2.0);
  w[0] = 1.0;
  if (config.fft_size % 2 == 0) w[config.num_bins() - 1] = 1.0;
  return w;
}

} // namespace bregpr
