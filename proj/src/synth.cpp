#include "fxmf/synth.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <string>

#include "fxmf/error.hpp"
#include "fxmf/qgaussian.hpp"
#include "fxmf/rng.hpp"

namespace fxmf {
namespace {

constexpr std::array<std::string_view, 8> kKindNames{"iid_gaussian",           "ar1",
                                                     "binomial_cascade",       "q_gaussian_iid",
                                                     "long_memory_volatility", "triangle_consistent_rates",
                                                     "lag_coupled_pair",       "spiked_residual"};

std::mutex& fft_mutex() {
    static std::mutex m;
    return m;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw UsageError(message);
}

ReturnSeries make_returns(const GeneratorSpec& spec, std::vector<double> values, ReturnKind kind, std::string label) {
    TimeGrid grid{spec.params.start_epoch, spec.params.step, values.size()};
    ReturnSeries::Meta meta;
    meta.kind = kind;
    meta.label = std::move(label);
    return ReturnSeries(grid, std::move(values), {}, std::move(meta));
}

std::vector<double> normals(std::size_t n, double sigma, Rng& rng) {
    std::vector<double> x(n);
    for (auto& v : x) v = sigma * rng.normal();
    return x;
}

TickSeries rate_from_log_prices(const std::vector<double>& log_price, const GeneratorParams& p, std::string label) {
    std::vector<double> prices(log_price.size());
    for (std::size_t i = 0; i < prices.size(); ++i) prices[i] = std::exp(log_price[i]);
    TimeGrid grid{p.start_epoch, p.step, prices.size()};
    return TickSeries(grid, std::move(prices), std::vector<std::uint8_t>(grid.count, 0), std::move(label));
}

std::vector<double> cumulate(const std::vector<double>& inc, double start) {
    std::vector<double> out(inc.size() + 1);
    out[0] = start;
    for (std::size_t i = 0; i < inc.size(); ++i) out[i + 1] = out[i] + inc[i];
    return out;
}

Generated triangle_rates(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    const std::size_t n = spec.length;
    require(n >= 3, "triangle_consistent_rates needs length >= 3");
    const std::size_t steps = n - 1;
    std::array<std::vector<double>, 3> inc;
    for (int k = 0; k < 3; ++k) {
        Rng rng(spec.seed, 10 + k);
        inc[k] = normals(steps, p.return_scale, rng);
    }
    if (p.symmetric_sections) {
        // Section s of currency k repeats section 0 of walk (k + s) mod 3, so
        // the three legs see the same increments in rotated order.
        require(steps % 1536 == 0, "symmetric_sections needs length - 1 to be a multiple of 1536");
        const std::size_t sec = steps / 3;
        std::array<std::vector<double>, 3> rot = inc;
        for (std::size_t s = 1; s < 3; ++s)
            for (int k = 0; k < 3; ++k)
                std::copy(inc[(k + s) % 3].begin(), inc[(k + s) % 3].begin() + sec, rot[k].begin() + s * sec);
        inc = rot;
    }
    const std::array<double, 3> start{0.0, 0.3, -0.2};
    std::array<std::vector<double>, 3> lp;
    for (int k = 0; k < 3; ++k) lp[k] = cumulate(inc[k], start[k]);
    Generated g;
    for (int k = 0; k < 3; ++k) {
        const int j = (k + 1) % 3;
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = lp[k][i] - lp[j][i];
        g.ticks.push_back(rate_from_log_prices(d, p, p.currencies[k] + "/" + p.currencies[j]));
    }
    return g;
}

Generated lag_coupled(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    require(p.lag >= 0, "lag must be >= 0");
    require(spec.length >= 2, "lag_coupled_pair needs length >= 2");
    const auto L = static_cast<std::size_t>(p.lag);
    const std::size_t steps = spec.length - 1;
    Rng drv(spec.seed, 20), fol(spec.seed, 21), ind(spec.seed, 22);
    const auto x = normals(steps + L, 1.0, drv);  // L burn-in samples first
    std::vector<double> w(L + 1);
    double wsum = 0.0;
    for (std::size_t j = 0; j <= L; ++j) {
        w[j] = L == 0 ? 1.0 : std::exp(-2.0 * static_cast<double>(j) / static_cast<double>(L));
        wsum += w[j];
    }
    for (auto& v : w) v /= wsum;
    std::vector<double> xi(steps), yi(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= L; ++j) acc += w[j] * x[t + L - j];
        xi[t] = p.return_scale * x[t + L];
        yi[t] = p.return_scale * (p.coupling * acc + p.follower_noise * fol.normal());
    }
    Generated g;
    g.ticks.push_back(rate_from_log_prices(cumulate(xi, 0.1), p, "DRV/USD"));
    g.ticks.push_back(rate_from_log_prices(cumulate(yi, -0.1), p, "FOL/USD"));
    if (p.independent_companion) g.ticks.push_back(rate_from_log_prices(cumulate(normals(steps, p.return_scale, ind), 0.0), p, "IND/USD"));
    return g;
}

std::vector<double> spiked(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    require(p.spike_rate >= 0.0 && p.spike_rate < 1.0, "spike_rate must lie in [0, 1)");
    require(p.spike_scale > 0.0 && p.spike_tail_index > 0.0, "spike amplitude parameters must be positive");
    Rng noise(spec.seed, 30), events(spec.seed, 31);
    auto x = normals(spec.length, p.sigma, noise);
    if (p.spike_rate == 0.0) return x;
    // Each event is a mispricing that is corrected one step later: +S then -S.
    double t = events.exponential(p.spike_rate);
    while (t + 1.0 < static_cast<double>(spec.length)) {
        const auto i = static_cast<std::size_t>(t);
        const double amp = p.sigma * p.spike_scale * std::pow(events.uniform_open(), -1.0 / p.spike_tail_index);
        const double sign = events.uniform01() < 0.5 ? -1.0 : 1.0;
        x[i] += sign * amp;
        x[i + 1] -= sign * amp;
        t += 2.0 + events.exponential(p.spike_rate);
    }
    return x;
}

}  // namespace

std::string_view to_string(GeneratorKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

GeneratorKind parse_generator_kind(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == text) return static_cast<GeneratorKind>(i);
    throw UsageError("unknown generator kind '" + std::string(text) + "'");
}

std::string_view to_string(Conservation c) { return c == Conservation::exact ? "exact" : "in_average"; }

Conservation parse_conservation(std::string_view text) {
    if (text == "exact") return Conservation::exact;
    if (text == "in_average") return Conservation::in_average;
    throw UsageError("unknown conservation mode '" + std::string(text) + "'");
}

Cascade canonical_cascade(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    require(p.a >= 0.5 && p.a < 1.0, "cascade parameter a must lie in [0.5, 1)");
    require(p.m >= 1 && p.m <= 30, "cascade depth m must lie in 1..30");
    const std::size_t cells = std::size_t{1} << p.m;
    require(spec.length == 0 || spec.length == cells, "cascade length must be 2^m");
    require(p.mass_spread >= 0.0, "mass_spread must be >= 0");
    Rng rng(spec.seed, 40);
    const bool random = p.conservation == Conservation::in_average;
    const double s = p.mass_spread;
    const auto factor = [&] { return random ? std::exp(s * rng.normal() - 0.5 * s * s) : 1.0; };
    Cascade c;
    std::vector<double> w{1.0}, next;
    c.level_mass.push_back(1.0);
    for (int level = 0; level < p.m; ++level) {
        next.resize(w.size() * 2);
        for (std::size_t i = 0; i < w.size(); ++i) {
            next[2 * i] = p.a * w[i] * factor();
            next[2 * i + 1] = (1.0 - p.a) * w[i] * factor();
        }
        w.swap(next);
        double total = 0.0;
        for (double v : w) total += v;
        c.level_mass.push_back(total);
    }
    c.cells = std::move(w);
    return c;
}

std::vector<double> fractional_gaussian_noise(std::size_t n, double hurst, std::uint64_t seed) {
    require(n >= 1, "fGn length must be positive");
    require(hurst > 0.0 && hurst < 1.0, "Hurst exponent must lie in (0, 1)");
    std::size_t half = 1;
    while (half < n) half <<= 1;
    const std::size_t m = 2 * half;
    const auto gamma = [hurst](double k) {
        const double e = 2.0 * hurst;
        return 0.5 * (std::pow(std::fabs(k + 1.0), e) - 2.0 * std::pow(std::fabs(k), e) + std::pow(std::fabs(k - 1.0), e));
    };
    std::vector<std::complex<double>> buf(m);
    for (std::size_t k = 0; k <= half; ++k) buf[k] = gamma(static_cast<double>(k));
    for (std::size_t k = half + 1; k < m; ++k) buf[k] = gamma(static_cast<double>(m - k));
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fft_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(m), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);  // circulant eigenvalues
    Rng rng(seed, 50);
    for (std::size_t k = 0; k < m; ++k) {
        const double lam = std::max(buf[k].real(), 0.0);
        const double amp = std::sqrt(lam / static_cast<double>(m));
        const double re = rng.normal(), im = rng.normal();
        buf[k] = {amp * re, amp * im};
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fft_mutex());
        fftw_destroy_plan(plan);
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
    return out;
}

TickSeries prices_from_increments(const std::vector<double>& increments, double start_price, TimeGrid grid_start,
                                  std::string label) {
    require(start_price > 0.0, "start price must be positive");
    const auto lp = cumulate(increments, std::log(start_price));
    std::vector<double> prices(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) prices[i] = std::exp(lp[i]);
    TimeGrid grid{grid_start.start_epoch, grid_start.step, prices.size()};
    return TickSeries(grid, std::move(prices), std::vector<std::uint8_t>(grid.count, 0), std::move(label));
}

Generated generate(const GeneratorSpec& spec) {
    const auto& p = spec.params;
    require(p.step > 0, "step must be positive");
    Generated g;
    switch (spec.kind) {
        case GeneratorKind::iid_gaussian: {
            require(spec.length >= 1 && p.sigma > 0.0, "iid_gaussian needs length >= 1 and sigma > 0");
            Rng rng(spec.seed, 1);
            g.returns.push_back(make_returns(spec, normals(spec.length, p.sigma, rng), ReturnKind::plain, "iid"));
            break;
        }
        case GeneratorKind::ar1: {
            require(std::fabs(p.phi) < 1.0, "ar1 needs |phi| < 1");
            require(spec.length >= 1 && p.sigma > 0.0, "ar1 needs length >= 1 and sigma > 0");
            Rng rng(spec.seed, 2);
            std::vector<double> x(spec.length);
            x[0] = p.sigma / std::sqrt(1.0 - p.phi * p.phi) * rng.normal();
            for (std::size_t i = 1; i < x.size(); ++i) x[i] = p.phi * x[i - 1] + p.sigma * rng.normal();
            g.returns.push_back(make_returns(spec, std::move(x), ReturnKind::plain, "ar1"));
            break;
        }
        case GeneratorKind::binomial_cascade: {
            auto c = canonical_cascade(spec);
            g.returns.push_back(make_returns(spec, std::move(c.cells), ReturnKind::plain, "cascade"));
            break;
        }
        case GeneratorKind::q_gaussian_iid: {
            require(p.q >= 1.0 && p.q < 3.0, "q_gaussian_iid needs 1 <= q < 3");
            require(spec.length >= 1 && p.qg_sigma > 0.0, "q_gaussian_iid needs length >= 1 and qg_sigma > 0");
            const auto params = QGaussianParams::from_sigma(p.q, p.qg_sigma);
            Rng rng(spec.seed, 3);
            std::vector<double> x(spec.length);
            for (auto& v : x) v = quantile_right(rng.uniform_open(), params);
            g.returns.push_back(make_returns(spec, std::move(x), ReturnKind::plain, "qgauss"));
            break;
        }
        case GeneratorKind::long_memory_volatility: {
            require(p.decay > 0.0 && p.decay < 1.0, "decay must lie in (0, 1)");
            require(spec.length >= 2, "long_memory_volatility needs length >= 2");
            // fGn correlations fall off as tau^(2H - 2).
            const auto omega = fractional_gaussian_noise(spec.length, 1.0 - 0.5 * p.decay, spec.seed);
            Rng rng(spec.seed, 4);
            std::vector<double> v(spec.length);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::fabs(rng.normal()) * std::exp(p.vol_of_vol * omega[i]);
            g.returns.push_back(make_returns(spec, std::move(v), ReturnKind::volatility, "volatility"));
            break;
        }
        case GeneratorKind::triangle_consistent_rates:
            return triangle_rates(spec);
        case GeneratorKind::lag_coupled_pair:
            return lag_coupled(spec);
        case GeneratorKind::spiked_residual:
            require(spec.length >= 2 && p.sigma > 0.0, "spiked_residual needs length >= 2 and sigma > 0");
            g.returns.push_back(make_returns(spec, spiked(spec), ReturnKind::residual, "spiked_residual"));
            break;
    }
    return g;
}

}  // namespace fxmf
