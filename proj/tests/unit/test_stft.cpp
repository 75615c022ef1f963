#include "bregpr/error.hpp"
#include "bregpr/stft.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace bregpr;
using namespace bregpr::testing;

TEST_CASE("periodic Hann window")
{
  const auto w4 = make_window(WindowKind::hann_periodic, 4);
  REQUIRE(w4.size() == 4);
  CHECK(w4[0] == doctest::Approx(0.0));
  CHECK(w4[1] == doctest::Approx(0.5));
  CHECK(w4[2] == doctest::Approx(1.0));
  CHECK(w4[3] == doctest::Approx(0.5));

  for (int n : {2, 8, 64, 1024}) CHECK(make_window(WindowKind::hann_periodic, n)[0] == 0.0);

  const auto w = make_window(WindowKind::hann_periodic, 1024);
  const double energy =
      std::accumulate(w.begin(), w.end(), 0.0, [](double a, double v) { return a + v * v; });
  CHECK(energy == doctest::Approx(384.0).epsilon(1e-14));

  CHECK_THROWS_AS(make_window(WindowKind::hann_periodic, 1), Error);
  CHECK_THROWS_AS(make_window(static_cast<WindowKind>(7), 16), Error);
}

TEST_CASE("config validation")
{
  CHECK_NOTHROW(StftConfig::hann(1024, 256).validate());
  CHECK_THROWS_AS(StftConfig::hann(1024, 300).validate(), Error);
  CHECK_THROWS_AS(StftConfig::hann(1024, 0).validate(), Error);
  CHECK_THROWS_AS((StftConfig{1024, 256, WindowKind::hann_periodic, 2048}).validate(), Error);
}

TEST_CASE("stft framing and shape")
{
  const auto cfg = StftConfig::hann(1024, 256);
  std::mt19937_64 rng(1);
  const Signal x = random_signal(rng, 16000);
  const auto S = stft(x, cfg);
  CHECK(S.data.rows() == 513);
  // ceil(16000/256) = 63 frames plus 3 lead-in frames.
  CHECK(S.data.cols() == 66);

  SUBCASE("short signal still gets full coverage")
  {
    const auto s = stft(random_signal(rng, 100), cfg);
    CHECK(s.data.cols() == 4);
  }
  SUBCASE("empty signal is rejected")
  {
    CHECK_THROWS_AS(stft(Signal{Eigen::VectorXd(0), 16000}, cfg), Error);
  }
}

TEST_CASE("stft of zero and impulse signals")
{
  const auto cfg = StftConfig::hann(1024, 256);
  const auto zero = stft(Signal{Eigen::VectorXd::Zero(3000), 16000}, cfg);
  CHECK(zero.data.cwiseAbs().maxCoeff() == 0.0);

  Signal impulse{Eigen::VectorXd::Zero(4096), 16000};
  impulse.samples[0] = 1.0;
  const auto S = stft(impulse, cfg);
  // The frame whose window starts at sample 0 sees w[0] = 0 in every bin.
  const int aligned = cfg.padding() / cfg.hop;
  CHECK(S.data.col(aligned).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  // Frame 0 starts 768 samples earlier: flat magnitude w[768] / sqrt(1024).
  const double expected = 0.5 / 32.0;
  CHECK((S.data.col(0).array().abs() - expected).abs().maxCoeff() < 1e-15);
}

TEST_CASE("stft linearity")
{
  const auto cfg = StftConfig::hann(256, 64);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Signal u = random_signal(rng, 2000);
    const Signal v = random_signal(rng, 2000);
    const Signal sum{u.samples + v.samples, 16000};
    const Eigen::MatrixXcd lhs = stft(sum, cfg).data;
    const Eigen::MatrixXcd rhs = stft(u, cfg).data + stft(v, cfg).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("normalization constant")
{
  CHECK(std::abs(normalization_constant(StftConfig::hann(1024, 256)) - 1.5) < 1e-12);

  SUBCASE("Hann at 50% overlap is not COLA for the squared window")
  {
    const auto cfg = StftConfig::hann(1024, 512);
    CHECK_THROWS_AS(normalization_constant(cfg), Error);
    const auto sums = squared_overlap_sum(cfg);
    const double mean = std::accumulate(sums.begin(), sums.end(), 0.0) / sums.size();
    CHECK(mean == doctest::Approx(0.75).epsilon(1e-14));
  }
  SUBCASE("constant and positive for overlap factors >= 3")
  {
    for (auto cfg : {StftConfig::hann(32, 8), StftConfig::hann(1536, 512),
                     StftConfig::hann(512, 64), StftConfig::hann(256, 32)}) {
      const auto sums = squared_overlap_sum(cfg);
      const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
      CHECK(*hi - *lo < 1e-12);
      CHECK(normalization_constant(cfg) > 0.0);
    }
  }
}

TEST_CASE("istft inverts stft")
{
  const auto cfg = StftConfig::hann(1024, 256);
  std::mt19937_64 rng(3);
  const Signal x = random_signal(rng, 16000);
  const Signal y = istft(stft(x, cfg), x.size());
  CHECK(max_abs_diff(x.samples, y.samples) < 1e-10);

  SUBCASE("zero spectrogram")
  {
    ComplexSpectrogram zero{Eigen::MatrixXcd::Zero(513, 20), cfg};
    CHECK(istft(zero, 4000).samples.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("superposition")
  {
    const Signal u = random_signal(rng, 5000);
    const Signal v = random_signal(rng, 5000);
    ComplexSpectrogram sum{stft(u, cfg).data + stft(v, cfg).data, cfg};
    CHECK(max_abs_diff(istft(sum, 5000).samples, u.samples + v.samples) < 1e-10);
  }
  SUBCASE("bin count must match the config")
  {
    ComplexSpectrogram bad{Eigen::MatrixXcd::Zero(512, 4), cfg};
    CHECK_THROWS_AS(istft(bad, 100), Error);
  }
}

TEST_CASE("round trip over random lengths and configs")
{
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> len(64, 5000);
  for (auto cfg : {StftConfig::hann(64, 16), StftConfig::hann(256, 64),
                   StftConfig::hann(96, 32), StftConfig::hann(1024, 256)}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Signal x = random_signal(rng, std::max(len(rng), cfg.win_length));
      CHECK(max_abs_diff(istft(stft(x, cfg), x.size()).samples, x.samples) < 1e-10);
    }
  }
}

TEST_CASE("adjoint identity under Hermitian bin weights")
{
  // <A u, G> over the full spectrum, written on the one-sided grid, equals
  // <u, A^H G> = <u, b * istft(G)>.
  std::mt19937_64 rng(5);
  for (auto cfg : {StftConfig::hann(64, 16), StftConfig::hann(1024, 256)}) {
    const double b = normalization_constant(cfg);
    const auto weights = hermitian_bin_weights(cfg);
    for (int trial = 0; trial < 5; ++trial) {
      const Signal u = random_signal(rng, 3000);
      const auto S = stft(u, cfg);
      const Eigen::MatrixXcd G = random_complex(rng, S.data.rows(), S.data.cols());
      double lhs = 0.0;
      for (Eigen::Index j = 0; j < G.cols(); ++j)
        for (Eigen::Index k = 0; k < G.rows(); ++k)
          lhs += weights[k] * std::real(std::conj(S.data(k, j)) * G(k, j));
      const double rhs = b * u.samples.dot(istft({G, cfg}, u.size()).samples);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(lhs));
    }
  }
}

TEST_CASE("magnitude_power")
{
  const auto cfg = StftConfig::hann(4, 1);
  ComplexSpectrogram s{Eigen::MatrixXcd(3, 1), cfg};
  s.data << std::complex<double>(3, 4), std::complex<double>(0, 0),
      std::complex<double>(-1, 0);
  const auto m1 = magnitude_power(s, 1);
  const auto m2 = magnitude_power(s, 2);
  CHECK(m1.data(0, 0) == doctest::Approx(5.0));
  CHECK(m2.data(0, 0) == doctest::Approx(25.0));
  CHECK(m1.data(1, 0) == 0.0);
  CHECK(m2.data(1, 0) == 0.0);
  CHECK(m1.d == 1);
  CHECK(m2.d == 2);
  CHECK_THROWS_AS(magnitude_power(s, 3), Error);
}
