#include "fxmf/mfdfa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fxmf/core.hpp"
#include "fxmf/error.hpp"
#include "fxmf/rng.hpp"

namespace fxmf {
namespace {

// Column-major n x (order + 1) matrix with orthonormal columns spanning the
// polynomials of degree <= order on j = 0..n-1.
std::vector<double> polynomial_basis(std::size_t n, int order) {
    const auto m = static_cast<std::size_t>(order + 1);
    std::vector<double> q(n * m);
    const double centre = 0.5 * static_cast<double>(n - 1);
    const double half = std::max(centre, 1.0);
    for (std::size_t k = 0; k < m; ++k) {
        double* col = q.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) col[j] = std::pow((static_cast<double>(j) - centre) / half, static_cast<double>(k));
        // Two rounds of modified Gram-Schmidt.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < k; ++p) {
                const double* prev = q.data() + p * n;
                double dot = 0.0;
                for (std::size_t j = 0; j < n; ++j) dot += prev[j] * col[j];
                for (std::size_t j = 0; j < n; ++j) col[j] -= dot * prev[j];
            }
        }
        double norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) norm += col[j] * col[j];
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < n; ++j) col[j] /= norm;
    }
    return q;
}

// Mean squared residual of y after projecting out the basis columns.
double detrended_variance(const double* y, std::size_t n, const std::vector<double>& basis, std::size_t m,
                          std::vector<double>& resid) {
    resid.assign(y, y + n);
    for (std::size_t k = 0; k < m; ++k) {
        const double* col = basis.data() + k * n;
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += col[j] * y[j];
        for (std::size_t j = 0; j < n; ++j) resid[j] -= dot * col[j];
    }
    double ss = 0.0;
    for (double v : resid) ss += v * v;
    return ss / static_cast<double>(n);
}

double log_mean_power(const std::vector<double>& log_f2, double r) {
    const double s = 0.5 * r;
    double top = -std::numeric_limits<double>::infinity();
    for (double v : log_f2) top = std::max(top, s * v);
    double acc = 0.0;
    for (double v : log_f2) acc += std::exp(s * v - top);
    return (top + std::log(acc / static_cast<double>(log_f2.size()))) / r;
}

}  // namespace

std::vector<double> default_r_grid() {
    std::vector<double> r;
    for (int i = -10; i <= 10; ++i) r.push_back(0.4 * i);
    return r;
}

std::vector<std::size_t> log_spaced_scales(std::size_t n_min, std::size_t n_max, std::size_t n_count) {
    if (n_min < 1 || n_max < n_min) throw UsageError("scale bounds must satisfy 1 <= n_min <= n_max");
    std::vector<std::size_t> out;
    if (n_count <= 1 || n_max == n_min) return {n_min};
    const double l0 = std::log(static_cast<double>(n_min)), l1 = std::log(static_cast<double>(n_max));
    for (std::size_t i = 0; i < n_count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_count - 1);
        auto n = static_cast<std::size_t>(std::llround(std::exp(l0 + t * (l1 - l0))));
        n = std::clamp(n, n_min, n_max);
        if (out.empty() || n != out.back()) out.push_back(n);
    }
    return out;
}

MfdfaConfig resolve(const MfdfaConfig& config, std::size_t count) {
    MfdfaConfig c = config;
    if (c.r_values.empty()) c.r_values = default_r_grid();
    if (c.poly_order < 0) throw UsageError("poly_order must be >= 0");
    if (c.n_max == 0) c.n_max = count / 4;
    if (c.scaling_window.second == 0) c.scaling_window.second = count / 50;
    if (c.n_min < static_cast<std::size_t>(c.poly_order) + 2)
        throw UsageError("n_min must be at least poly_order + 2");
    if (c.n_max > count / 4)
        throw UsageError("n_max " + std::to_string(c.n_max) + " exceeds count/4 = " + std::to_string(count / 4));
    if (c.n_max < c.n_min) throw UsageError("series too short for n_min = " + std::to_string(c.n_min));
    if (c.n_count < 2) throw UsageError("n_count must be at least 2");
    if (!std::is_sorted(c.r_values.begin(), c.r_values.end()) ||
        std::adjacent_find(c.r_values.begin(), c.r_values.end()) != c.r_values.end())
        throw UsageError("r values must be strictly increasing");
    if (!(c.r_values.front() < 0.0 && c.r_values.back() > 0.0))
        throw UsageError("r grid must contain both negative and positive orders");
    if (c.scaling_window.first > c.scaling_window.second) throw UsageError("empty scaling window");
    return c;
}

std::vector<double> profile(std::span<const double> x) {
    if (x.size() < 2) throw UsageError("profile needs at least two samples");
    const double m = mean(x);
    std::vector<double> y(x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i] - m;
        y[i] = acc;
    }
    return y;
}

FluctuationSurface fluctuation_surface(std::span<const double> series, const MfdfaConfig& config) {
    const MfdfaConfig c = resolve(config, series.size());
    const auto y = profile(series);
    const std::size_t N = y.size();
    FluctuationSurface out;
    out.scales = log_spaced_scales(c.n_min, c.n_max, c.n_count);
    out.r_values = c.r_values;
    out.F.assign(c.r_values.size(), std::vector<double>(out.scales.size()));
    out.segments_used.resize(out.scales.size());
    const auto m = static_cast<std::size_t>(c.poly_order + 1);
    std::vector<double> resid, log_f2;
    for (std::size_t s = 0; s < out.scales.size(); ++s) {
        const std::size_t n = out.scales[s];
        const std::size_t segs = N / n;
        const auto basis = polynomial_basis(n, c.poly_order);
        log_f2.clear();
        for (std::size_t pass = 0; pass < 2; ++pass) {
            for (std::size_t v = 0; v < segs; ++v) {
                const std::size_t start = pass == 0 ? v * n : N - (v + 1) * n;
                const double* seg = y.data() + start;
                const double f2 = detrended_variance(seg, n, basis, m, resid);
                double ms = 0.0;
                for (std::size_t j = 0; j < n; ++j) ms += seg[j] * seg[j];
                ms /= static_cast<double>(n);
                if (!(f2 > 1e-24 * ms) || f2 <= 0.0)
                    throw DegenerateInputError("segment " + std::to_string(v) + (pass == 0 ? " (forward)" : " (reverse)") +
                                               " at scale " + std::to_string(n) + " has zero residual variance");
                log_f2.push_back(std::log(f2));
            }
        }
        out.segments_used[s] = log_f2.size();
        for (std::size_t i = 0; i < c.r_values.size(); ++i) {
            const double r = c.r_values[i];
            double lf;
            if (r == 0.0) {
                double acc = 0.0;
                for (double v : log_f2) acc += v;
                lf = 0.5 * acc / static_cast<double>(log_f2.size());
            } else {
                lf = log_mean_power(log_f2, r);
            }
            out.F[i][s] = std::exp(lf);
        }
        // Power-mean inequality: F_r is nondecreasing in r.
        for (std::size_t i = 1; i < c.r_values.size(); ++i)
            if (out.F[i][s] < out.F[i - 1][s] * (1.0 - 1e-12))
                throw std::logic_error("F_r(n) decreased in r at scale " + std::to_string(n));
    }
    return out;
}

HurstResult generalized_hurst(const FluctuationSurface& surface, std::pair<std::size_t, std::size_t> window) {
    std::vector<std::size_t> idx;
    for (std::size_t s = 0; s < surface.scales.size(); ++s)
        if (surface.scales[s] >= window.first && surface.scales[s] <= window.second) idx.push_back(s);
    if (idx.size() < 5)
        throw UsageError("scaling window [" + std::to_string(window.first) + ", " + std::to_string(window.second) +
                         "] holds " + std::to_string(idx.size()) + " scales, need at least 5");
    HurstResult out;
    out.r_values = surface.r_values;
    out.scaling_window = window;
    out.n_scales = idx.size();
    const double k = static_cast<double>(idx.size());
    double mx = 0.0;
    for (auto s : idx) mx += std::log(static_cast<double>(surface.scales[s]));
    mx /= k;
    double sxx = 0.0;
    for (auto s : idx) {
        const double d = std::log(static_cast<double>(surface.scales[s])) - mx;
        sxx += d * d;
    }
    for (std::size_t i = 0; i < surface.r_values.size(); ++i) {
        double my = 0.0;
        for (auto s : idx) my += std::log(surface.F[i][s]);
        my /= k;
        double sxy = 0.0;
        for (auto s : idx) sxy += (std::log(static_cast<double>(surface.scales[s])) - mx) * (std::log(surface.F[i][s]) - my);
        const double slope = sxy / sxx;
        double ssr = 0.0;
        for (auto s : idx) {
            const double e = std::log(surface.F[i][s]) - my - slope * (std::log(static_cast<double>(surface.scales[s])) - mx);
            ssr += e * e;
        }
        out.h.push_back(slope);
        out.h_stderr.push_back(std::sqrt(ssr / (k - 2.0) / sxx));
    }
    return out;
}

MultifractalResult tau_and_spectrum(std::span<const double> r, std::span<const double> h) {
    const std::size_t n = r.size();
    if (n < 5) throw UsageError("spectrum needs at least 5 r values");
    if (h.size() != n) throw UsageError("r and h(r) lengths differ");
    for (std::size_t i = 1; i < n; ++i)
        if (!(r[i] > r[i - 1])) throw UsageError("r values must be strictly increasing");
    MultifractalResult out;
    out.r_values.assign(r.begin(), r.end());
    out.h.assign(h.begin(), h.end());
    out.tau.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.tau[i] = r[i] * h[i] - 1.0;
    out.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        out.alpha[i] = (out.tau[hi] - out.tau[lo]) / (r[hi] - r[lo]);
    }
    out.f_alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.f_alpha[i] = r[i] * (out.alpha[i] - h[i]) + 1.0;
    const auto [amin, amax] = std::minmax_element(out.alpha.begin(), out.alpha.end());
    out.width = *amax - *amin;
    for (std::size_t i = 1; i < n && !out.anomalous; ++i) {
        const double slope = (out.tau[i] - out.tau[i - 1]) / (r[i] - r[i - 1]);
        if (slope < -1e-9) out.anomalous = true;
        if (i + 1 < n) {
            const double next = (out.tau[i + 1] - out.tau[i]) / (r[i + 1] - r[i]);
            if (next > slope + 1e-9) out.anomalous = true;
        }
    }
    return out;
}

MfdfaReport mfdfa(std::span<const double> series, const MfdfaConfig& config) {
    MfdfaReport rep;
    rep.config = resolve(config, series.size());
    rep.surface = fluctuation_surface(series, rep.config);
    rep.hurst = generalized_hurst(rep.surface, rep.config.scaling_window);
    rep.spectrum = tau_and_spectrum(rep.hurst.r_values, rep.hurst.h);
    return rep;
}

std::vector<double> shuffle_surrogate(std::span<const double> series, std::uint64_t seed) {
    std::vector<double> out(series.begin(), series.end());
    Rng rng(seed, 0x5u);
    shuffle(std::span<double>(out), rng);
    return out;
}

}  // namespace fxmf
