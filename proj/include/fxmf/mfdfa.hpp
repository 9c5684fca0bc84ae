#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace fxmf {

struct MfdfaConfig {
    /// Empty means the default grid -4, -3.6, ..., 4.
    std::vector<double> r_values;
    std::size_t n_min = 16;
    /// 0 means count / 4.
    std::size_t n_max = 0;
    std::size_t n_count = 24;
    int poly_order = 2;
    /// Scales used for the h(r) regression, inclusive. A zero upper bound
    /// means count / 50.
    std::pair<std::size_t, std::size_t> scaling_window{16, 0};
};

std::vector<double> default_r_grid();

/// Fills defaults for a series of the given length and validates the result.
/// Throws UsageError when the configuration cannot be satisfied.
MfdfaConfig resolve(const MfdfaConfig& config, std::size_t count);

/// Log-spaced integer scales in [n_min, n_max], duplicates removed.
std::vector<std::size_t> log_spaced_scales(std::size_t n_min, std::size_t n_max, std::size_t n_count);

/// Y(j) = sum_{i <= j} (x_i - <x>).
std::vector<double> profile(std::span<const double> x);

struct FluctuationSurface {
    std::vector<std::size_t> scales;
    std::vector<double> r_values;
    /// F[i][s]: order r_values[i] at scales[s].
    std::vector<std::vector<double>> F;
    std::vector<std::size_t> segments_used;  // 2 M_n per scale
};

/// Detrended fluctuation function. Segments of length n are taken from both
/// ends of the profile and detrended with a least-squares polynomial of order
/// poly_order. F_0 is the logarithmic average. Throws DegenerateInputError
/// when a segment has no residual variance.
FluctuationSurface fluctuation_surface(std::span<const double> series, const MfdfaConfig& config);

struct HurstResult {
    std::vector<double> r_values;
    std::vector<double> h;
    std::vector<double> h_stderr;
    std::pair<std::size_t, std::size_t> scaling_window{0, 0};
    std::size_t n_scales = 0;
};

/// Least-squares slope of ln F_r(n) against ln n over the scaling window.
/// Requires at least five scales inside the window.
HurstResult generalized_hurst(const FluctuationSurface& surface, std::pair<std::size_t, std::size_t> window);

struct MultifractalResult {
    std::vector<double> r_values;
    std::vector<double> h;
    std::vector<double> tau;      // r h(r) - 1
    std::vector<double> alpha;    // finite-difference d tau / d r
    std::vector<double> f_alpha;  // r (alpha - h) + 1
    double width = 0.0;           // max alpha - min alpha
    /// tau(r) failed the discrete concavity or monotonicity check.
    bool anomalous = false;
};

/// Requires at least five strictly increasing r values.
MultifractalResult tau_and_spectrum(std::span<const double> r_values, std::span<const double> h);

struct MfdfaReport {
    MfdfaConfig config;
    FluctuationSurface surface;
    HurstResult hurst;
    MultifractalResult spectrum;
};

/// Full analysis with a resolved configuration.
MfdfaReport mfdfa(std::span<const double> series, const MfdfaConfig& config = {});

/// Uniformly random permutation, deterministic for a given seed.
std::vector<double> shuffle_surrogate(std::span<const double> series, std::uint64_t seed);

}  // namespace fxmf
