#pragma once

#include <optional>

#include "fracdecay/specfun.hpp"

namespace fracdecay::specfun::detail {

/// Double-precision series, returned only when cancellation and truncation are both
/// within `acc`.
std::optional<Evaluation> plain_series(const KilbasSaigoParams& params, double z, const SeriesAccuracy& acc);

}  // namespace fracdecay::specfun::detail
