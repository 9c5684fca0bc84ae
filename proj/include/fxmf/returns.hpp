#pragma once

#include <cstdint>
#include <vector>

#include "fxmf/core.hpp"

namespace fxmf {

/// G(t_i; dt) = ln x(t_i + dt) - ln x(t_i).
///
/// overlap = true yields count - dt_steps values at unit stride; overlap = false
/// yields floor((count - 1) / dt_steps) values at stride dt_steps. A return is
/// flagged in spans_gap when any price it touches (both endpoints included) is
/// gap-masked.
ReturnSeries log_returns(const TickSeries& series, int dt_steps, bool overlap = true);

/// g = (G - <G>) / v with v the population standard deviation.
ReturnSeries normalize(const ReturnSeries& returns);

/// G_A^B + G_B^C + G_C^A sample by sample.
ReturnSeries residual_returns(const Triangle& triangle);

/// |g|. Requires a plain return series.
ReturnSeries volatility(const ReturnSeries& returns);

/// Per time-of-day standard deviation of volatility. Slot of sample i is
/// (timestamp(i) mod 86400) / step, so the profile follows UTC clock time.
struct DailyVolatilityProfile {
    std::int64_t step = 60;
    std::size_t samples_per_day = 1440;
    std::vector<double> sigma;
    /// Number of unflagged samples that contributed to each slot.
    std::vector<std::size_t> counts;

    std::size_t slot_of(std::int64_t timestamp) const;
};

/// Builds the profile from a volatility series, ignoring samples flagged in
/// spans_gap. Slots without data get sigma = 0.
DailyVolatilityProfile daily_volatility_profile(const ReturnSeries& vol);

/// vol[i] / sigma[slot(i)]. Throws DegenerateInputError if a used slot has
/// zero sigma.
ReturnSeries remove_daily_trend(const ReturnSeries& vol, const DailyVolatilityProfile& profile);

}  // namespace fxmf
