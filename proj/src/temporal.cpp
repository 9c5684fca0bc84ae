#include "fxmf/temporal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "fxmf/error.hpp"

namespace fxmf {
namespace {

// fftw's planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

// Raw lagged products sum_t x(t) x(t + tau), tau = 0..max_lag, by zero-padded FFT.
std::vector<double> lagged_products(std::span<const double> x, std::size_t max_lag) {
    const std::size_t n = x.size();
    const std::size_t m = next_pow2(n + max_lag + 1);
    const std::size_t nc = m / 2 + 1;
    std::unique_ptr<double, FftwFree> buf(static_cast<double*>(fftw_malloc(sizeof(double) * m)));
    std::unique_ptr<fftw_complex, FftwFree> spec(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc)));
    fftw_plan fwd, inv;
    {
        std::lock_guard lock(planner_mutex());
        fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf.get(), spec.get(), FFTW_ESTIMATE);
        inv = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), buf.get(), FFTW_ESTIMATE);
    }
    std::copy(x.begin(), x.end(), buf.get());
    std::fill(buf.get() + n, buf.get() + m, 0.0);
    fftw_execute(fwd);
    for (std::size_t k = 0; k < nc; ++k) {
        const double re = spec.get()[k][0], im = spec.get()[k][1];
        spec.get()[k][0] = re * re + im * im;
        spec.get()[k][1] = 0.0;
    }
    fftw_execute(inv);
    std::vector<double> out(max_lag + 1);
    for (std::size_t t = 0; t <= max_lag; ++t) out[t] = buf.get()[t] / static_cast<double>(m);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(inv);
    }
    return out;
}

}  // namespace

AutocorrResult autocorrelation(std::span<const double> series, std::size_t max_lag) {
    const std::size_t n = series.size();
    if (n < 20 || max_lag >= n / 10)
        throw UsageError("max_lag " + std::to_string(max_lag) + " must be below count/10 (count = " +
                         std::to_string(n) + ")");
    const double m = mean(series);
    const double sd = population_stddev(series, m);
    if (!(sd > 0.0)) throw DegenerateInputError("autocorrelation of a constant series");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = (series[i] - m) / sd;

    const auto sums = lagged_products(g, max_lag);
    AutocorrResult r;
    r.lags.resize(max_lag + 1);
    r.c.resize(max_lag + 1);
    r.n_eff.resize(max_lag + 1);
    r.confidence_95.resize(max_lag + 1);
    for (std::size_t tau = 0; tau <= max_lag; ++tau) {
        r.lags[tau] = tau;
        r.n_eff[tau] = n - tau;
        r.c[tau] = sums[tau] / static_cast<double>(n - tau);
        r.confidence_95[tau] = 1.96 / std::sqrt(static_cast<double>(n - tau));
    }
    return r;
}

AutocorrResult autocorrelation(const ReturnSeries& series, std::size_t max_lag) {
    return autocorrelation(std::span<const double>(series.values()), max_lag);
}

PowerLawFit fit_power_law(const AutocorrResult& ac, std::pair<std::size_t, std::size_t> window) {
    const auto [lo, hi] = window;
    if (lo < 1 || hi <= lo) throw UsageError("power-law window must satisfy 1 <= tau_min < tau_max");
    if (ac.lags.empty() || hi > ac.lags.back())
        throw UsageError("power-law window exceeds the available lags");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < ac.lags.size(); ++i) {
        const std::size_t tau = ac.lags[i];
        if (tau < lo || tau > hi) continue;
        if (!(ac.c[i] > 0.0))
            throw DomainError("non-positive autocorrelation at lag " + std::to_string(tau) + " inside the fit window");
        const double x = std::log(static_cast<double>(tau));
        const double y = std::log(ac.c[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++k;
    }
    if (k < 2) throw UsageError("power-law window holds fewer than two lags");
    const double kn = static_cast<double>(k);
    const double vx = sxx - sx * sx / kn;
    const double vy = syy - sy * sy / kn;
    const double cxy = sxy - sx * sy / kn;
    const double slope = cxy / vx;
    PowerLawFit fit;
    fit.exponent = -slope;
    fit.amplitude = std::exp((sy - slope * sx) / kn);
    fit.fit_window = window;
    fit.n_points = k;
    fit.r_squared = vy > 0.0 ? std::clamp(cxy * cxy / (vx * vy), 0.0, 1.0) : 1.0;
    return fit;
}

}  // namespace fxmf
