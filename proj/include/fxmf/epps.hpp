#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fxmf/core.hpp"

namespace fxmf {

struct EppsCurve {
    std::vector<int> dt_grid;  // grid steps
    std::vector<std::array<double, 3>> lambdas;  // descending per dt
    std::vector<std::size_t> n_returns;          // usable returns per dt
    /// Columns are the eigenvectors for lambdas.back(), same sign convention
    /// as diagonalize().
    Eigen::Matrix3d eigenvectors_at_max_dt = Eigen::Matrix3d::Zero();
    bool is_triangle = false;
    /// Labels after orientation; a leg listed as "B/A" was inverted.
    std::array<std::string, 3> labels;
    /// +1 or -1 per input series.
    std::array<int, 3> orientation{1, 1, 1};
};

std::vector<int> default_dt_grid();  // 1, 2, 4, ..., 512

/// Signs that make three pair labels chain cyclically, preferring the fewest
/// inversions. Empty when no orientation closes a triangle.
std::optional<std::array<int, 3>> cyclic_orientation(const std::array<std::string, 3>& labels);

/// For each dt: non-overlapping log returns, returns touching a gap in any of
/// the three series dropped, each series normalised, C = g g^T / n and its
/// eigenvalues. With triangle = true the legs are first oriented to chain as
/// A/B, B/C, C/A (inverting a leg negates its returns).
EppsCurve epps_curve(const std::array<TickSeries, 3>& triple, const std::vector<int>& dt_grid, bool triangle);

struct SaturationResult {
    double fraction = 0.95;
    bool saturated = false;
    /// Smallest dt with lambda_1(dt) >= fraction * lambda_1(dt_max).
    std::optional<int> dt_star;
};

/// A curve whose lambda_1 rises by more than (1 - fraction), relative to its
/// final value, over the last grid step counts as not saturated.
SaturationResult saturation_scale(const EppsCurve& curve, double fraction = 0.95);

}  // namespace fxmf
