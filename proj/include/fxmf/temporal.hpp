#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fxmf/core.hpp"

namespace fxmf {

struct AutocorrResult {
    std::vector<std::size_t> lags;  // grid steps, 0..max_lag
    std::vector<double> c;
    std::vector<std::size_t> n_eff;  // count - lag
    std::vector<double> confidence_95;  // 1.96 / sqrt(n_eff), white-noise null
};

/// c(tau) = sum_t g(t) g(t + tau) / (n - tau), where g is the series after
/// removing its mean and dividing by its population standard deviation.
/// Already-normalised input passes through that step unchanged up to rounding.
/// Requires max_lag < count / 10.
AutocorrResult autocorrelation(std::span<const double> series, std::size_t max_lag);
AutocorrResult autocorrelation(const ReturnSeries& series, std::size_t max_lag);

struct PowerLawFit {
    /// c(tau) ~ amplitude * tau^(-exponent); a decaying correlation has exponent > 0.
    double exponent = 0.0;
    double amplitude = 0.0;
    std::pair<std::size_t, std::size_t> fit_window{1, 1};
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

/// Least-squares line through (ln tau, ln c) for lags in [tau_min, tau_max].
/// Throws DomainError naming the first lag with c <= 0.
PowerLawFit fit_power_law(const AutocorrResult& ac, std::pair<std::size_t, std::size_t> window);

}  // namespace fxmf
