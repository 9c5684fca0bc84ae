#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

#include "fxmf/core.hpp"
#include "fxmf/ingest.hpp"

namespace fxmf {

/// K x T_K matrix whose row b holds the returns of weekly segment b,
/// normalised to zero mean and unit variance within the row.
struct SegmentMatrix {
    Eigen::MatrixXd M;
    std::int64_t step = 60;
    /// Seconds since Sunday 00:00 UTC at the first column.
    std::int64_t week_offset = 0;

    std::size_t K() const { return static_cast<std::size_t>(M.rows()); }
    std::size_t T_K() const { return static_cast<std::size_t>(M.cols()); }
    double Q() const { return static_cast<double>(M.cols()) / static_cast<double>(M.rows()); }
};

/// Return sample j of segment b is series[range_b.first + j]; with unit-step
/// returns stamped at interval start this covers exactly the prices of the
/// weekly window. Throws DegenerateInputError for a zero-variance segment.
SegmentMatrix build_segment_matrix(const ReturnSeries& series, const WeekSegmentation& seg);

/// C = M M^T / T_K.
Eigen::MatrixXd correlation_matrix(const SegmentMatrix& m);

struct ElementDistribution {
    /// Moment-matched Gaussian of the off-diagonal elements.
    double mean = 0.0;
    double sigma = 0.0;
    std::size_t n_elements = 0;
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
};

/// Upper-triangle off-diagonal entries of C, histogrammed over [min, max].
ElementDistribution element_distribution(const Eigen::MatrixXd& C, std::size_t bins = 50);

struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // descending, values below 1e-10 set to 0
    Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalues[k]
};

/// Symmetric eigensolver. Each eigenvector is signed so that its
/// largest-magnitude component (first one on ties) is positive.
EigenDecomposition diagonalize(const Eigen::MatrixXd& C);

struct MpBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
};

/// lambda_{min,max} = sigma2 (1 + 1/Q -/+ 2 sqrt(1/Q)). Throws UsageError for
/// Q < 1 unless allow_q_below_one is set.
MpBounds mp_bounds(double Q, double sigma2 = 1.0, bool allow_q_below_one = false);

/// rho(lambda) = Q / (2 pi sigma2) sqrt((lambda_max - lambda)(lambda - lambda_min)) / lambda
/// inside the support, 0 outside.
double mp_density(double lambda, double Q, double sigma2 = 1.0, bool allow_q_below_one = false);

/// Fraction of eigenvalues strictly outside [lambda_min, lambda_max].
double fraction_outside_mp(const Eigen::VectorXd& eigenvalues, double Q, double sigma2 = 1.0);

struct Eigensignal {
    std::size_t k = 1;  // 1-based mode index, 1 = largest eigenvalue
    std::vector<double> z;
};

/// z_k(t) = sum_b v^k_b M(b, t).
Eigensignal eigensignal(const SegmentMatrix& m, const EigenDecomposition& dec, std::size_t k);

struct EigensignalOutlier {
    std::size_t index = 0;
    double value = 0.0;
    double score = 0.0;  // |z - mean| / sd
    std::int64_t seconds_into_week = 0;
};

/// Samples whose deviation from the mean exceeds threshold * sd, largest first.
std::vector<EigensignalOutlier> eigensignal_outliers(const Eigensignal& s, const SegmentMatrix& m,
                                                     double threshold = 10.0);

}  // namespace fxmf
