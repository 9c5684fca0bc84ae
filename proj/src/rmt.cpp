#include "fxmf/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fxmf/error.hpp"

namespace fxmf {

SegmentMatrix build_segment_matrix(const ReturnSeries& series, const WeekSegmentation& seg) {
    if (seg.K == 0 || seg.index_ranges.size() != seg.K) throw UsageError("segmentation holds no complete week");
    const std::size_t T = seg.week_length;
    SegmentMatrix out;
    out.M.resize(static_cast<Eigen::Index>(seg.K), static_cast<Eigen::Index>(T));
    out.step = series.grid().step;
    out.week_offset = seconds_into_week(series.grid().timestamp(seg.index_ranges.front().first));
    const auto& x = series.values();
    for (std::size_t b = 0; b < seg.K; ++b) {
        const auto [s, e] = seg.index_ranges[b];
        if (e - s != T || e > x.size())
            throw UsageError("segment " + std::to_string(b) + " does not lie inside the return series");
        const std::span<const double> row(x.data() + s, T);
        const double m = mean(row);
        const double sd = population_stddev(row, m);
        if (!(sd > 0.0)) throw DegenerateInputError("segment " + std::to_string(b) + " has zero variance");
        for (std::size_t j = 0; j < T; ++j)
            out.M(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = (row[j] - m) / sd;
    }
    return out;
}

Eigen::MatrixXd correlation_matrix(const SegmentMatrix& m) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m.M.rows(), m.M.rows());
    C.selfadjointView<Eigen::Lower>().rankUpdate(m.M);
    C = C.selfadjointView<Eigen::Lower>();
    C /= static_cast<double>(m.T_K());
    return C;
}

ElementDistribution element_distribution(const Eigen::MatrixXd& C, std::size_t bins) {
    if (bins == 0) throw UsageError("histogram needs at least one bin");
    std::vector<double> v;
    for (Eigen::Index i = 0; i < C.rows(); ++i)
        for (Eigen::Index j = i + 1; j < C.cols(); ++j) v.push_back(C(i, j));
    ElementDistribution d;
    d.n_elements = v.size();
    if (v.empty()) return d;
    d.mean = mean(v);
    d.sigma = population_stddev(v, d.mean);
    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    d.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) d.bin_edges[b] = lo + (hi - lo) * static_cast<double>(b) / bins;
    d.counts.assign(bins, 0);
    for (double x : v) {
        auto b = static_cast<std::size_t>((x - lo) / (hi - lo) * bins);
        ++d.counts[std::min(b, bins - 1)];
    }
    return d;
}

EigenDecomposition diagonalize(const Eigen::MatrixXd& C) {
    if (C.rows() != C.cols() || C.rows() == 0) throw UsageError("diagonalize needs a non-empty square matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(C);
    if (solver.info() != Eigen::Success) throw DomainError("eigensolver failed");
    const Eigen::Index n = C.rows();
    EigenDecomposition d;
    d.eigenvalues.resize(n);
    d.eigenvectors.resize(n, n);
    // Eigen returns ascending order.
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index src = n - 1 - k;
        double lam = solver.eigenvalues()[src];
        if (lam < 1e-10) lam = 0.0;
        d.eigenvalues[k] = lam;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < n; ++i)
            if (std::fabs(v[i]) > std::fabs(v[arg]) * (1.0 + 1e-12)) arg = i;
        if (v[arg] < 0.0) v = -v;
        d.eigenvectors.col(k) = v;
    }
    return d;
}

MpBounds mp_bounds(double Q, double sigma2, bool allow_q_below_one) {
    if (!(Q > 0.0) || !(sigma2 > 0.0)) throw UsageError("Marchenko-Pastur needs Q > 0 and sigma2 > 0");
    if (Q < 1.0 && !allow_q_below_one)
        throw UsageError("Marchenko-Pastur comparison needs Q = T/K >= 1 (Q = " + std::to_string(Q) + ")");
    const double r = 1.0 / Q;
    return {sigma2 * (1.0 + r - 2.0 * std::sqrt(r)), sigma2 * (1.0 + r + 2.0 * std::sqrt(r))};
}

double mp_density(double lambda, double Q, double sigma2, bool allow_q_below_one) {
    const auto b = mp_bounds(Q, sigma2, allow_q_below_one);
    if (!(lambda > b.lambda_min && lambda < b.lambda_max)) return 0.0;
    return Q / (2.0 * std::numbers::pi * sigma2) * std::sqrt((b.lambda_max - lambda) * (lambda - b.lambda_min)) / lambda;
}

double fraction_outside_mp(const Eigen::VectorXd& eigenvalues, double Q, double sigma2) {
    if (eigenvalues.size() == 0) return 0.0;
    const auto b = mp_bounds(Q, sigma2);
    std::size_t out = 0;
    for (double l : eigenvalues)
        if (l < b.lambda_min || l > b.lambda_max) ++out;
    return static_cast<double>(out) / static_cast<double>(eigenvalues.size());
}

Eigensignal eigensignal(const SegmentMatrix& m, const EigenDecomposition& dec, std::size_t k) {
    if (k < 1 || k > m.K() || static_cast<Eigen::Index>(m.K()) != dec.eigenvectors.rows())
        throw UsageError("mode index " + std::to_string(k) + " outside 1.." + std::to_string(m.K()));
    const Eigen::VectorXd z = m.M.transpose() * dec.eigenvectors.col(static_cast<Eigen::Index>(k - 1));
    return {k, std::vector<double>(z.data(), z.data() + z.size())};
}

std::vector<EigensignalOutlier> eigensignal_outliers(const Eigensignal& s, const SegmentMatrix& m, double threshold) {
    if (!(threshold > 0.0)) throw UsageError("outlier threshold must be positive");
    std::vector<EigensignalOutlier> out;
    if (s.z.empty()) return out;
    const double mu = mean(s.z);
    const double sd = population_stddev(s.z, mu);
    if (!(sd > 0.0)) return out;
    for (std::size_t i = 0; i < s.z.size(); ++i) {
        const double score = std::fabs(s.z[i] - mu) / sd;
        if (score > threshold) {
            const std::int64_t tow = (m.week_offset + static_cast<std::int64_t>(i) * m.step) % (7 * 86400);
            out.push_back({i, s.z[i], score, tow});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    return out;
}

}  // namespace fxmf
