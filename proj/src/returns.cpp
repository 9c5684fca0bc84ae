#include "fxmf/returns.hpp"

#include <cmath>
#include <string>

namespace fxmf {

ReturnSeries log_returns(const TickSeries& series, int dt_steps, bool overlap) {
    const std::size_t n = series.size();
    if (dt_steps <= 0) throw UsageError("dt_steps must be positive");
    const auto dt = static_cast<std::size_t>(dt_steps);
    if (dt >= n)
        throw UsageError("dt_steps " + std::to_string(dt) + " must be smaller than the series length " +
                         std::to_string(n));
    const std::size_t stride = overlap ? 1 : dt;
    const std::size_t count = overlap ? n - dt : (n - 1) / dt;

    std::vector<double> logp(n);
    for (std::size_t i = 0; i < n; ++i) logp[i] = std::log(series.values()[i]);
    // gap_prefix[i] = number of gap-masked samples in [0, i)
    std::vector<std::size_t> gap_prefix(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) gap_prefix[i + 1] = gap_prefix[i] + (series.gap_mask()[i] ? 1 : 0);

    std::vector<double> values(count);
    std::vector<std::uint8_t> flags(count, 0);
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = j * stride;
        values[j] = logp[i + dt] - logp[i];
        flags[j] = gap_prefix[i + dt + 1] - gap_prefix[i] > 0 ? 1 : 0;
    }
    const TimeGrid& g = series.grid();
    TimeGrid grid{g.start_epoch, g.step * static_cast<std::int64_t>(stride), count};
    ReturnSeries::Meta meta;
    meta.dt_steps = dt_steps;
    meta.kind = ReturnKind::plain;
    meta.label = series.label();
    return ReturnSeries(grid, std::move(values), std::move(flags), std::move(meta));
}

ReturnSeries normalize(const ReturnSeries& returns) {
    const auto& x = returns.values();
    const double m = mean(x);
    const double sd = population_stddev(x, m);
    if (!(sd > 0.0) || !std::isfinite(sd))
        throw DegenerateInputError("cannot normalize '" + returns.label() + "': zero variance");
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) / sd;
    ReturnSeries::Meta meta = returns.meta();
    meta.normalized = true;
    meta.mean_removed = m;
    meta.std_used = sd;
    return ReturnSeries(returns.grid(), std::move(out), returns.spans_gap(), std::move(meta));
}

ReturnSeries residual_returns(const Triangle& triangle) {
    const auto& legs = triangle.legs();
    const std::size_t n = legs[0].size();
    std::vector<double> out(n);
    std::vector<std::uint8_t> flags(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = legs[0].values()[i] + legs[1].values()[i] + legs[2].values()[i];
        flags[i] = (legs[0].spans_gap()[i] | legs[1].spans_gap()[i] | legs[2].spans_gap()[i]) ? 1 : 0;
    }
    ReturnSeries::Meta meta;
    meta.dt_steps = legs[0].dt_steps();
    meta.kind = ReturnKind::residual;
    meta.label = legs[0].label() + "+" + legs[1].label() + "+" + legs[2].label();
    return ReturnSeries(legs[0].grid(), std::move(out), std::move(flags), std::move(meta));
}

ReturnSeries volatility(const ReturnSeries& returns) {
    if (returns.kind() != ReturnKind::plain)
        throw UsageError("volatility needs plain returns, got " + std::string(to_string(returns.kind())));
    std::vector<double> out(returns.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(returns.values()[i]);
    ReturnSeries::Meta meta = returns.meta();
    meta.kind = ReturnKind::volatility;
    return ReturnSeries(returns.grid(), std::move(out), returns.spans_gap(), std::move(meta));
}

std::size_t DailyVolatilityProfile::slot_of(std::int64_t timestamp) const {
    std::int64_t tod = timestamp % 86400;
    if (tod < 0) tod += 86400;
    return static_cast<std::size_t>(tod / step);
}

DailyVolatilityProfile daily_volatility_profile(const ReturnSeries& vol) {
    if (vol.kind() != ReturnKind::volatility) throw UsageError("daily profile needs a volatility series");
    const std::int64_t step = vol.grid().step;
    if (86400 % step != 0) throw UsageError("grid step " + std::to_string(step) + " s does not divide a day");
    DailyVolatilityProfile p;
    p.step = step;
    p.samples_per_day = static_cast<std::size_t>(86400 / step);
    std::vector<double> sum(p.samples_per_day, 0.0);
    p.counts.assign(p.samples_per_day, 0);
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (vol.spans_gap()[i]) continue;
        const auto s = p.slot_of(vol.grid().timestamp(i));
        sum[s] += vol.values()[i];
        ++p.counts[s];
    }
    std::vector<double> ss(p.samples_per_day, 0.0);
    for (std::size_t i = 0; i < vol.size(); ++i) {
        if (vol.spans_gap()[i]) continue;
        const auto s = p.slot_of(vol.grid().timestamp(i));
        const double d = vol.values()[i] - sum[s] / static_cast<double>(p.counts[s]);
        ss[s] += d * d;
    }
    p.sigma.assign(p.samples_per_day, 0.0);
    for (std::size_t s = 0; s < p.samples_per_day; ++s)
        if (p.counts[s] > 0) p.sigma[s] = std::sqrt(ss[s] / static_cast<double>(p.counts[s]));
    return p;
}

ReturnSeries remove_daily_trend(const ReturnSeries& vol, const DailyVolatilityProfile& profile) {
    if (vol.kind() != ReturnKind::volatility) throw UsageError("daily detrending needs a volatility series");
    if (vol.grid().step != profile.step || profile.sigma.size() != profile.samples_per_day)
        throw UsageError("daily profile does not match the series grid step");
    std::vector<double> out(vol.size());
    for (std::size_t i = 0; i < vol.size(); ++i) {
        const auto s = profile.slot_of(vol.grid().timestamp(i));
        const double sigma = profile.sigma[s];
        if (!(sigma > 0.0))
            throw DegenerateInputError("zero volatility sigma at time-of-day slot " + std::to_string(s));
        out[i] = vol.values()[i] / sigma;
    }
    return ReturnSeries(vol.grid(), std::move(out), vol.spans_gap(), vol.meta());
}

}  // namespace fxmf
