#pragma once

#include "bregpr/stft.hpp"

namespace bregpr {

/// SDR value reported when the distortion is numerically zero.
inline constexpr double sdr_cap_db = 240.0;

/// 20 log10(||ref|| / ||ref - est||) in dB, capped at sdr_cap_db.
double sdr(const Signal& reference, const Signal& estimate);

/// sdr(reference, estimate) - sdr(reference, baseline).
double sdri(const Signal& reference, const Signal& estimate,
            const Signal& baseline);

} // namespace bregpr
