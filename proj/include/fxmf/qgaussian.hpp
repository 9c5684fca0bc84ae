#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fxmf/error.hpp"

namespace fxmf {

/// q-Gaussian p(x) = N_q e_q^{-B (x - mu)^2}.
struct QGaussianParams {
    double q = 1.5;
    double B = 1.0;   // inverse width, > 0
    double mu = 0.0;  // location

    /// Generalised standard deviation, B = 1 / ((3 - q) sigma^2).
    double sigma() const;
    static QGaussianParams from_sigma(double q, double sigma, double mu = 0.0);
};

/// [1 + (1-q) x]^{1/(1-q)}; exp(x) at q = 1; 0 beyond the cutoff for q < 1
/// and +inf at the pole for q > 1.
double q_exponential(double x, double q);

/// Normalisation constant N_q. Throws UsageError for q >= 3 or B <= 0.
double normalization(const QGaussianParams& params);

double pdf(double x, const QGaussianParams& params);

enum class Wing { left, right };

std::string_view to_string(Wing wing);

/// Cumulative wing probability: P(X >= x) for the right wing, P(X <= x) for
/// the left wing. Requires 1 <= q < 3 (q == 1 is the Gaussian limit).
///
/// Near the centre the hypergeometric form
///   P = N_q [ C -/+ (x - mu) 2F1(1/2, 1/(q-1); 3/2; -B (q-1)(x - mu)^2) ]
/// is used; further out, where that difference cancels, the tail integral is
/// evaluated directly as
///   N_q u (1 + k u^2)^{-b} / (2b - 1) 2F1(b, 1; b + 1/2; 1 / (1 + k u^2)),
/// with u = |x - mu|, b = 1/(q-1), k = B (q-1).
double cdf_wing(double x, const QGaussianParams& params, Wing wing);

/// Sample sorted ascending; one-sided tail probabilities per wing.
class EmpiricalCdf {
public:
    explicit EmpiricalCdf(std::span<const double> sample);

    const std::vector<double>& sorted_values() const { return sorted_; }
    std::size_t size() const { return sorted_.size(); }

    /// Fraction of the sample >= x (right) or <= x (left).
    double tail_probability(double x, Wing wing) const;

    struct Point {
        double x;            // sample value
        double probability;  // (rank - 1/2) / n, rank counted from the wing's extreme
    };

    /// Wing points with |x| inside [lo, hi], at geometrically spaced tail
    /// ranks starting from min_rank; at most max_points distinct ranks.
    std::vector<Point> wing_points(Wing wing, double lo, double hi, std::size_t max_points,
                                   std::size_t min_rank) const;

private:
    std::vector<double> sorted_;
};

struct FitOptions {
    /// Fit range in |x| (units of the sample standard deviation for normalised input).
    double range_lo = 0.0;
    double range_hi = std::numeric_limits<double>::infinity();
    double q_lo = 1.0;
    double q_hi = 2.0;
    double q_step = 0.01;
    std::size_t max_points = 200;
    std::size_t min_rank = 5;
    int max_iterations = 200;
    double gradient_tolerance = 1e-8;
    /// Golden-section refinement of q around the best grid point.
    bool refine_q = true;
};

struct WingFit {
    Wing wing = Wing::right;
    QGaussianParams params;
    double objective = 0.0;  // sum of squared log-probability residuals
    std::size_t n_points = 0;
    int iterations = 0;
    bool converged = false;
};

struct QGaussianFit {
    WingFit left;
    WingFit right;
    std::pair<double, double> fit_range{0.0, std::numeric_limits<double>::infinity()};
};

/// Raised when the damped least-squares step exhausts its iteration budget
/// without meeting the gradient tolerance. Carries the best fit found.
class FitNonConvergence : public Error {
public:
    FitNonConvergence(const std::string& what, WingFit best) : Error(what), best_(best) {}
    const WingFit& best() const { return best_; }

private:
    WingFit best_;
};

/// Least squares in log tail probability over the fit range. q is scanned on
/// a fixed grid; for each q, (B, mu) are refined by Levenberg-Marquardt
/// warm-started from the previous grid point.
WingFit fit_wing(const EmpiricalCdf& ecdf, Wing wing, const FitOptions& options = {});

/// Fits both wings independently.
QGaussianFit fit(const EmpiricalCdf& ecdf, const FitOptions& options = {});

/// Objective for fixed parameters; exposed for diagnostics and tests.
double wing_objective(std::span<const EmpiricalCdf::Point> points, const QGaussianParams& params, Wing wing);

/// Inverse of the right-wing cumulative: returns x with P(X >= x) = p.
double quantile_right(double p, const QGaussianParams& params);

}  // namespace fxmf
