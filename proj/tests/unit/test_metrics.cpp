#include "bregpr/error.hpp"
#include "bregpr/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace bregpr;
using namespace bregpr::testing;

TEST_CASE("sdr")
{
  std::mt19937_64 rng(31);
  const Signal ref = random_signal(rng, 1000);
  const Signal half{0.5 * ref.samples, 16000};
  const Signal neg{-ref.samples, 16000};

  CHECK(sdr(ref, ref) == sdr_cap_db);
  CHECK(sdr(ref, half) == doctest::Approx(6.020599913279624).epsilon(1e-12));
  CHECK(sdr(ref, neg) == doctest::Approx(-6.020599913279624).epsilon(1e-12));

  for (double alpha : {0.5, 0.9, 2.0}) {
    const Signal scaled{alpha * ref.samples, 16000};
    CHECK(std::abs(sdr(ref, scaled) + 20.0 * std::log10(std::abs(1.0 - alpha))) < 1e-9);
  }

  CHECK_THROWS_AS(sdr(Signal{Eigen::VectorXd::Zero(10), 16000},
                      Signal{Eigen::VectorXd::Ones(10), 16000}),
                  Error);
  CHECK_THROWS_AS(sdr(ref, Signal{Eigen::VectorXd::Ones(10), 16000}), Error);
}

TEST_CASE("sdri")
{
  std::mt19937_64 rng(32);
  const Signal ref = random_signal(rng, 1000);
  const Signal a = random_signal(rng, 1000);
  const Signal b = random_signal(rng, 1000);
  const Signal half{0.5 * ref.samples, 16000};

  CHECK(sdri(ref, a, a) == 0.0);
  CHECK(sdri(ref, ref, half) == doctest::Approx(240.0 - 6.020599913279624).epsilon(1e-12));
  CHECK(sdri(ref, a, b) == -sdri(ref, b, a));
}
