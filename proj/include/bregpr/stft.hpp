#pragma once

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace bregpr {

/// Mono time-domain waveform.
struct Signal
{
  Eigen::VectorXd samples;
  int sample_rate = 16000;

  Eigen::Index size() const { return samples.size(); }

  /// Throws if the sample rate is not positive or a sample is NaN/Inf.
  void validate() const;
};

enum class WindowKind
{
  hann_periodic
};

struct StftConfig
{
  int win_length = 1024;
  int hop = 256;
  WindowKind window_kind = WindowKind::hann_periodic;
  int fft_size = 1024;

  /// Convenience constructor keeping fft_size == win_length.
  static StftConfig hann(int win_length, int hop)
  {
    return {win_length, hop, WindowKind::hann_periodic, win_length};
  }

  void validate() const;

  int num_bins() const { return fft_size / 2 + 1; }
  /// Zero samples prepended (and appended) before framing.
  int padding() const { return win_length - hop; }
  /// Number of frames for a signal of `length` samples.
  int num_frames(Eigen::Index length) const;

  bool operator==(const StftConfig&) const = default;
};

/// One-sided STFT: rows are frequency bins, columns are frames.
struct ComplexSpectrogram
{
  Eigen::MatrixXcd data;
  StftConfig config;
};

/// Nonnegative magnitude (d = 1) or power (d = 2) targets.
struct Measurements
{
  Eigen::MatrixXd data;
  int d = 1;

  void validate() const;
};

std::vector<double> make_window(WindowKind kind, int length);

/// Analysis operator A.
///
/// Frame j covers samples [j*hop - (win-hop), j*hop + hop), zero outside the
/// signal, so every sample of the input is covered by win/hop frames. The DFT
/// is orthonormal, which makes the full (two-sided) operator satisfy
/// A^H A = b I with b = normalization_constant(config).
ComplexSpectrogram stft(const Signal& signal, const StftConfig& config);

/// Pseudo-inverse A^+ = (1/b) A^H, truncated to `target_length` samples.
/// Imaginary parts of the DC and Nyquist bins are ignored.
Signal istft(const ComplexSpectrogram& spec, Eigen::Index target_length,
             int sample_rate = 16000);

/// Overlap sum of the squared window, sampled at each phase n in [0, hop).
std::vector<double> squared_overlap_sum(const StftConfig& config);

/// Constant b such that A^H A = b I. Throws if the squared-window overlap sum
/// is not constant to 1e-12.
double normalization_constant(const StftConfig& config);

/// Elementwise |z|^d.
Measurements magnitude_power(const ComplexSpectrogram& spec, int d);

/// Weights turning a one-sided sum into the full-spectrum sum: 1 for DC and
/// Nyquist, 2 for the other bins.
Eigen::VectorXd hermitian_bin_weights(const StftConfig& config);

} // namespace bregpr
