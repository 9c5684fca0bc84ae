#include "fxmf/epps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fxmf/error.hpp"
#include "fxmf/returns.hpp"
#include "fxmf/rmt.hpp"

namespace fxmf {
namespace {

std::string invert(const std::string& label) {
    const auto p = parse_pair(label);
    return p.quote + "/" + p.base;
}

}  // namespace

std::vector<int> default_dt_grid() {
    std::vector<int> g;
    for (int dt = 1; dt <= 512; dt *= 2) g.push_back(dt);
    return g;
}

std::optional<std::array<int, 3>> cyclic_orientation(const std::array<std::string, 3>& labels) {
    std::array<int, 8> order{0, 1, 2, 4, 3, 5, 6, 7};  // by number of inversions
    for (int mask : order) {
        std::array<std::string, 3> l = labels;
        std::array<int, 3> sign{1, 1, 1};
        for (int k = 0; k < 3; ++k)
            if (mask & (1 << k)) {
                l[k] = invert(l[k]);
                sign[k] = -1;
            }
        if (chains_cyclically(l)) return sign;
    }
    return std::nullopt;
}

EppsCurve epps_curve(const std::array<TickSeries, 3>& triple, const std::vector<int>& dt_grid, bool triangle) {
    const std::array<TimeGrid, 3> grids{triple[0].grid(), triple[1].grid(), triple[2].grid()};
    const auto report = validate_alignment(std::span<const TimeGrid>(grids));
    if (!report.aligned)
        throw AlignmentError("series " + std::to_string(*report.mismatch_index) + " differs from series 0 in grid " +
                             std::string(to_string(report.mismatch)));
    if (dt_grid.empty()) throw UsageError("empty dt grid");
    if (!std::is_sorted(dt_grid.begin(), dt_grid.end()) ||
        std::adjacent_find(dt_grid.begin(), dt_grid.end()) != dt_grid.end() || dt_grid.front() < 1)
        throw UsageError("dt grid must be positive and strictly increasing");
    const std::size_t span = triple[0].size();
    if (static_cast<std::size_t>(dt_grid.back()) * 100 > span)
        throw UsageError("largest dt " + std::to_string(dt_grid.back()) + " exceeds span/100 (span = " +
                         std::to_string(span) + " samples)");

    EppsCurve curve;
    curve.dt_grid = dt_grid;
    curve.is_triangle = triangle;
    for (int k = 0; k < 3; ++k) curve.labels[k] = triple[k].label();
    if (triangle) {
        const auto o = cyclic_orientation(curve.labels);
        if (!o)
            throw UsageError("labels " + curve.labels[0] + ", " + curve.labels[1] + ", " + curve.labels[2] +
                             " do not form a currency triangle");
        curve.orientation = *o;
        for (int k = 0; k < 3; ++k)
            if (curve.orientation[k] < 0) curve.labels[k] = invert(curve.labels[k]);
    }

    for (int dt : dt_grid) {
        std::array<ReturnSeries, 3> r{log_returns(triple[0], dt, false), log_returns(triple[1], dt, false),
                                      log_returns(triple[2], dt, false)};
        const std::size_t n_all = r[0].size();
        std::vector<std::size_t> keep;
        keep.reserve(n_all);
        for (std::size_t i = 0; i < n_all; ++i)
            if (!(r[0].spans_gap()[i] | r[1].spans_gap()[i] | r[2].spans_gap()[i])) keep.push_back(i);
        if (keep.size() < 3) throw DegenerateInputError("fewer than 3 gap-free returns at dt = " + std::to_string(dt));
        Eigen::MatrixXd g(3, static_cast<Eigen::Index>(keep.size()));
        for (int k = 0; k < 3; ++k) {
            std::vector<double> x(keep.size());
            for (std::size_t j = 0; j < keep.size(); ++j) x[j] = curve.orientation[k] * r[k].values()[keep[j]];
            const double m = mean(x);
            const double sd = population_stddev(x, m);
            if (!(sd > 0.0))
                throw DegenerateInputError("series " + triple[k].label() + " has zero return variance at dt = " +
                                           std::to_string(dt));
            for (std::size_t j = 0; j < keep.size(); ++j) g(k, static_cast<Eigen::Index>(j)) = (x[j] - m) / sd;
        }
        const Eigen::MatrixXd C = g * g.transpose() / static_cast<double>(keep.size());
        const auto dec = diagonalize(C);
        curve.lambdas.push_back({dec.eigenvalues[0], dec.eigenvalues[1], dec.eigenvalues[2]});
        curve.n_returns.push_back(keep.size());
        curve.eigenvectors_at_max_dt = dec.eigenvectors;
    }
    return curve;
}

SaturationResult saturation_scale(const EppsCurve& curve, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("saturation fraction must lie in (0, 1)");
    const std::size_t n = curve.lambdas.size();
    if (n < 5 || curve.dt_grid.size() != n) throw UsageError("saturation needs at least 5 points on the curve");
    SaturationResult out;
    out.fraction = fraction;
    const double last = curve.lambdas[n - 1][0];
    const double prev = curve.lambdas[n - 2][0];
    if ((last - prev) / last > 1.0 - fraction) return out;
    out.saturated = true;
    for (std::size_t i = 0; i < n; ++i)
        if (curve.lambdas[i][0] >= fraction * last) {
            out.dt_star = curve.dt_grid[i];
            break;
        }
    return out;
}

}  // namespace fxmf
