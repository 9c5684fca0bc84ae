#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fxmf/core.hpp"

namespace fxmf {

enum class GeneratorKind {
    iid_gaussian,
    ar1,
    binomial_cascade,
    q_gaussian_iid,
    long_memory_volatility,
    triangle_consistent_rates,
    lag_coupled_pair,
    spiked_residual,
};

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view text);

enum class Conservation { exact, in_average };

std::string_view to_string(Conservation c);
Conservation parse_conservation(std::string_view text);

struct GeneratorParams {
    double sigma = 1.0;  // innovation / background noise scale
    double phi = 0.5;    // ar1 coefficient, |phi| < 1

    double a = 0.6;  // cascade weight, [0.5, 1)
    int m = 16;      // cascade depth, 2^m cells
    Conservation conservation = Conservation::exact;
    double mass_spread = 0.3;  // log-sd of the unit-mean split factors (in_average)

    double q = 1.5;  // q_gaussian_iid, 1 <= q < 3
    double qg_sigma = 1.0;

    double decay = 0.4;         // long-memory volatility: c(tau) ~ tau^-decay, in (0, 1)
    double vol_of_vol = 0.5;

    int lag = 8;                // lag_coupled_pair window L
    double coupling = 1.0;      // weight of the lagged driver in the follower
    double follower_noise = 0.5;
    bool independent_companion = true;  // third, unrelated rate for Epps triples

    double return_scale = 1e-4;  // per-step log-price increment scale of rate generators
    bool symmetric_sections = false;  // triangle: rotate the latent walks over three sections
    std::array<std::string, 3> currencies{"EUR", "USD", "JPY"};

    double spike_rate = 1e-4;      // Poisson rate per sample
    double spike_scale = 300.0;    // minimum spike amplitude in units of sigma
    double spike_tail_index = 3.0;  // Pareto tail of the amplitudes

    std::int64_t start_epoch = 1073250000;  // Sunday 2004-01-04 21:00 UTC
    std::int64_t step = 60;
};

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::iid_gaussian;
    GeneratorParams params;
    std::uint64_t seed = 1;
    /// Samples. binomial_cascade takes 2^m and accepts 0 or 2^m here.
    std::size_t length = 1 << 17;
};

/// Rate generators fill `ticks`; the others fill `returns`.
struct Generated {
    std::vector<TickSeries> ticks;
    std::vector<ReturnSeries> returns;
};

/// Deterministic: equal specs give bit-identical output. Throws UsageError for
/// invalid parameters.
Generated generate(const GeneratorSpec& spec);

struct Cascade {
    std::vector<double> cells;       // 2^m cell measures
    std::vector<double> level_mass;  // total mass after each recursion, level 0..m
};

/// Binomial multiplicative cascade. exact: a parent's mass w splits into
/// (a w, (1-a) w). in_average: each child is further multiplied by an
/// independent unit-mean lognormal factor, so mass is conserved only in
/// expectation.
Cascade canonical_cascade(const GeneratorSpec& spec);

/// Fractional Gaussian noise with Hurst exponent H, unit variance, by
/// circulant embedding.
std::vector<double> fractional_gaussian_noise(std::size_t n, double hurst, std::uint64_t seed);

/// Prices exp(cumulative sum of increments) starting at start_price.
TickSeries prices_from_increments(const std::vector<double>& increments, double start_price, TimeGrid grid_start,
                                  std::string label);

}  // namespace fxmf
