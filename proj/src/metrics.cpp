#include "bregpr/metrics.hpp"

#include "bregpr/error.hpp"

#include <cmath>

namespace bregpr {

double sdr(const Signal& reference, const Signal& estimate)
{
  if (reference.size() != estimate.size())
    throw Error("sdr: reference and estimate lengths differ");
  const double ref_norm = reference.samples.norm();
  if (ref_norm == 0.0) throw Error("sdr: reference signal is identically zero");
  const double err_norm = (reference.samples - estimate.samples).norm();
  if (err_norm < 1e-12 * ref_norm) return sdr_cap_db;
  return 20.0 * std::log10(ref_norm / err_norm);
}

double sdri(const Signal& reference, const Signal& estimate,
            const Signal& baseline)
{
  return sdr(reference, estimate) - sdr(reference, baseline);
}

} // namespace bregpr
