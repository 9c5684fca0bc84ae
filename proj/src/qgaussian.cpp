#include "fxmf/qgaussian.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fxmf/special.hpp"

namespace fxmf {
namespace {

constexpr double kGaussianTolerance = 1e-12;

bool is_gaussian(double q) { return std::fabs(q - 1.0) < kGaussianTolerance; }

void check_params(const QGaussianParams& p) {
    if (!std::isfinite(p.q) || !std::isfinite(p.B) || !std::isfinite(p.mu))
        throw UsageError("q-Gaussian parameters must be finite");
    if (p.q >= 3.0) throw UsageError("q-Gaussian is not normalisable for q >= 3 (q = " + std::to_string(p.q) + ")");
    if (!(p.B > 0.0)) throw UsageError("q-Gaussian requires B > 0");
}

void check_wing_params(const QGaussianParams& p) {
    check_params(p);
    if (p.q < 1.0 - kGaussianTolerance)
        throw UsageError("cumulative wing form requires q >= 1 (q = " + std::to_string(p.q) + ")");
}

// Upper tail integral of the density beyond mu + u, u >= 0.
double far_tail(double u, const QGaussianParams& p, double norm) {
    const double beta = 1.0 / (p.q - 1.0);
    const double kappa = p.B * (p.q - 1.0);
    const double ku2 = kappa * u * u;
    const double prefactor = norm * u * std::exp(-beta * std::log1p(ku2)) / (2.0 * beta - 1.0);
    if (prefactor == 0.0) return 0.0;
    return prefactor * hyp2f1(beta, 1.0, beta + 0.5, 1.0 / (1.0 + ku2));
}

}  // namespace

double QGaussianParams::sigma() const { return 1.0 / std::sqrt((3.0 - q) * B); }

QGaussianParams QGaussianParams::from_sigma(double q, double sigma, double mu) {
    if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
    if (q >= 3.0) throw UsageError("q must be < 3");
    return {q, 1.0 / ((3.0 - q) * sigma * sigma), mu};
}

double q_exponential(double x, double q) {
    if (is_gaussian(q)) return std::exp(x);
    const double t = (1.0 - q) * x;
    if (1.0 + t > 0.0) return std::exp(std::log1p(t) / (1.0 - q));
    return q < 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double normalization(const QGaussianParams& p) {
    check_params(p);
    const double q = p.q;
    if (is_gaussian(q)) return std::sqrt(p.B / std::numbers::pi);
    // Both branches reduce to a Gamma ratio with offset 1/2, evaluated without
    // forming the (large) log-gammas separately.
    if (q < 1.0) {
        const double g = 1.0 / (1.0 - q);
        return std::sqrt((1.0 - q) * p.B / std::numbers::pi) / boost::math::tgamma_delta_ratio(g + 1.0, 0.5);
    }
    const double beta = 1.0 / (q - 1.0);
    return std::sqrt((q - 1.0) * p.B / std::numbers::pi) / boost::math::tgamma_delta_ratio(beta - 0.5, 0.5);
}

double pdf(double x, const QGaussianParams& p) {
    const double norm = normalization(p);
    const double d = x - p.mu;
    return norm * q_exponential(-p.B * d * d, p.q);
}

std::string_view to_string(Wing wing) { return wing == Wing::left ? "left" : "right"; }

double cdf_wing(double x, const QGaussianParams& p, Wing wing) {
    check_wing_params(p);
    const double y = x - p.mu;
    const double d = wing == Wing::right ? y : -y;  // signed distance into the wing
    if (is_gaussian(p.q)) return 0.5 * std::erfc(std::sqrt(p.B) * d);

    const double q = p.q;
    const double beta = 1.0 / (q - 1.0);
    const double kappa = p.B * (q - 1.0);
    const double u = std::fabs(y);
    const double norm = normalization(p);
    if (kappa * u * u < 0.5 && p.B * u * u < 4.0) {
        // N_q times the constant term is exactly 1/2.
        const double half = 0.5;
        const double delta = -kappa * u * u;
        return half - norm * d * hyp2f1(0.5, beta, 1.5, delta);
    }
    const double tail = far_tail(u, p, norm);
    return d >= 0.0 ? tail : 1.0 - tail;
}

double quantile_right(double prob, const QGaussianParams& p) {
    check_wing_params(p);
    if (!(prob > 0.0 && prob < 1.0)) throw UsageError("quantile probability must lie in (0, 1)");
    if (prob == 0.5) return p.mu;
    // Solve T(d) = target for d >= 0 where T(d) = P(X >= mu + d).
    const double target = std::min(prob, 1.0 - prob);
    const double sign = prob < 0.5 ? 1.0 : -1.0;
    const auto tail = [&](double d) { return cdf_wing(p.mu + d, p, Wing::right); };
    const double scale = p.sigma();
    double lo = 0.0, hi = scale;
    while (tail(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw DomainError("quantile bracket overflow");
    }
    // Newton on ln T(d), safeguarded by the bracket.
    const double log_target = std::log(target);
    double d = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double t = tail(d);
        const double g = std::log(t) - log_target;
        if (g > 0.0) lo = d; else hi = d;
        const double slope = -pdf(p.mu + d, p) / t;
        double next = d - g / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::fabs(next - d) <= 1e-14 * std::max(d, scale) || hi - lo <= 1e-15 * std::max(hi, scale)) {
            d = next;
            break;
        }
        d = next;
    }
    return p.mu + sign * d;
}

EmpiricalCdf::EmpiricalCdf(std::span<const double> sample) : sorted_(sample.begin(), sample.end()) {
    if (sorted_.empty()) throw UsageError("empirical CDF needs a non-empty sample");
    for (double v : sorted_)
        if (!std::isfinite(v)) throw DataError("empirical CDF sample contains a non-finite value");
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::tail_probability(double x, Wing wing) const {
    const auto n = static_cast<double>(sorted_.size());
    if (wing == Wing::right) {
        const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(sorted_.end() - it) / n;
    }
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / n;
}

std::vector<EmpiricalCdf::Point> EmpiricalCdf::wing_points(Wing wing, double lo, double hi, std::size_t max_points,
                                                           std::size_t min_rank) const {
    const std::size_t n = sorted_.size();
    // Value at tail rank k (1-based) for this wing.
    const auto at_rank = [&](std::size_t k) { return wing == Wing::right ? sorted_[n - k] : sorted_[k - 1]; };
    const auto on_wing = [&](double v) { return wing == Wing::right ? v >= 0.0 : v <= 0.0; };
    const auto in_range = [&](double v) { return on_wing(v) && std::fabs(v) >= lo && std::fabs(v) <= hi; };

    // Ranks inside the range form one contiguous block since |x| falls with rank.
    std::size_t k_first = 0, k_last = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double v = at_rank(k);
        if (!on_wing(v)) break;
        if (in_range(v)) {
            if (k_first == 0) k_first = k;
            k_last = k;
        }
    }
    std::vector<Point> pts;
    if (k_first == 0) return pts;
    k_first = std::max(k_first, std::max<std::size_t>(min_rank, 1));
    if (k_first > k_last) return pts;
    const double l0 = std::log(static_cast<double>(k_first));
    const double l1 = std::log(static_cast<double>(k_last));
    const std::size_t m = std::max<std::size_t>(max_points, 2);
    std::size_t prev = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double t = m == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(m - 1);
        auto k = static_cast<std::size_t>(std::llround(std::exp(l0 + t * (l1 - l0))));
        k = std::clamp(k, k_first, k_last);
        if (k == prev) continue;
        prev = k;
        pts.push_back({at_rank(k), (static_cast<double>(k) - 0.5) / static_cast<double>(n)});
    }
    return pts;
}

double wing_objective(std::span<const EmpiricalCdf::Point> points, const QGaussianParams& params, Wing wing) {
    double cost = 0.0;
    for (const auto& pt : points) {
        const double model = std::max(cdf_wing(pt.x, params, wing), 1e-300);
        const double r = std::log(pt.probability) - std::log(model);
        cost += r * r;
    }
    return cost;
}

namespace {

struct InnerResult {
    QGaussianParams params;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Residuals r_i = ln P_emp - ln P_model and the Jacobian with respect to
// (ln B, mu). P depends on B only through sqrt(B) (x - mu), which gives the
// ln B column from the density.
double residuals(std::span<const EmpiricalCdf::Point> pts, const QGaussianParams& p, Wing wing, Eigen::VectorXd& r,
                 Eigen::MatrixXd* jac) {
    const double s = wing == Wing::right ? 1.0 : -1.0;
    double cost = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double model = std::max(cdf_wing(pts[i].x, p, wing), 1e-300);
        r[static_cast<Eigen::Index>(i)] = std::log(pts[i].probability) - std::log(model);
        cost += r[static_cast<Eigen::Index>(i)] * r[static_cast<Eigen::Index>(i)];
        if (jac) {
            const double dens = pdf(pts[i].x, p);
            const double y = pts[i].x - p.mu;
            const double dP_dmu = s * dens;
            const double dP_dlogB = -s * dens * y * 0.5;
            (*jac)(static_cast<Eigen::Index>(i), 0) = -dP_dlogB / model;
            (*jac)(static_cast<Eigen::Index>(i), 1) = -dP_dmu / model;
        }
    }
    return cost;
}

InnerResult refine_width_location(std::span<const EmpiricalCdf::Point> pts, Wing wing, double q,
                                  QGaussianParams start, const FitOptions& opt) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::VectorXd r(n), r_trial(n);
    Eigen::MatrixXd jac(n, 2);
    QGaussianParams p{q, start.B, start.mu};
    double cost = residuals(pts, p, wing, r, &jac);
    double lambda = 1e-3;
    InnerResult out{p, cost, 0, false};
    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::Vector2d grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance * (1.0 + cost)) {
            out.converged = true;
            break;
        }
        const Eigen::Matrix2d h = jac.transpose() * jac;
        bool accepted = false;
        while (lambda < 1e12) {
            Eigen::Matrix2d damped = h;
            damped(0, 0) += lambda * std::max(h(0, 0), 1e-12);
            damped(1, 1) += lambda * std::max(h(1, 1), 1e-12);
            const Eigen::Vector2d step = damped.ldlt().solve(-grad);
            QGaussianParams trial{q, p.B * std::exp(step[0]), p.mu + step[1]};
            double trial_cost = std::numeric_limits<double>::infinity();
            if (std::isfinite(trial.B) && trial.B > 0.0 && std::isfinite(trial.mu))
                trial_cost = residuals(pts, trial, wing, r_trial, nullptr);
            if (trial_cost < cost) {
                p = trial;
                cost = residuals(pts, p, wing, r, &jac);
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // No descent direction left at working precision.
            out.converged = grad.lpNorm<Eigen::Infinity>() <= 1e-5 * (1.0 + cost);
            break;
        }
    }
    out.params = p;
    out.cost = cost;
    return out;
}

}  // namespace

WingFit fit_wing(const EmpiricalCdf& ecdf, Wing wing, const FitOptions& opt) {
    if (!(opt.q_lo >= 1.0) || !(opt.q_hi < 3.0) || opt.q_hi < opt.q_lo)
        throw UsageError("q bounds must satisfy 1 <= q_lo <= q_hi < 3");
    if (!(opt.q_step > 0.0)) throw UsageError("q grid step must be positive");
    if (!(opt.range_lo >= 0.0) || !(opt.range_hi > opt.range_lo)) throw UsageError("invalid fit range");
    const auto pts = ecdf.wing_points(wing, opt.range_lo, opt.range_hi, opt.max_points, opt.min_rank);
    if (pts.size() < 50)
        throw UsageError("need at least 50 empirical points inside the fit range, got " + std::to_string(pts.size()));

    // Start from the sample's own scale and centre.
    const auto& xs = ecdf.sorted_values();
    const double centre = xs[xs.size() / 2];
    double m2 = 0.0;
    for (double v : xs) m2 += (v - centre) * (v - centre);
    const double sd = std::sqrt(m2 / static_cast<double>(xs.size()));
    if (!(sd > 0.0)) throw DegenerateInputError("cannot fit a zero-variance sample");

    const auto steps = static_cast<int>(std::floor((opt.q_hi - opt.q_lo) / opt.q_step + 1e-9));
    InnerResult best;
    best.cost = std::numeric_limits<double>::infinity();
    double best_q = opt.q_lo;
    QGaussianParams warm = QGaussianParams::from_sigma(opt.q_lo, sd, centre);
    for (int i = 0; i <= steps; ++i) {
        const double q = opt.q_lo + i * opt.q_step;
        auto res = refine_width_location(pts, wing, q, warm, opt);
        warm = res.params;
        if (res.cost < best.cost) {
            best = res;
            best_q = q;
        }
    }
    if (opt.refine_q) {
        double a = std::max(opt.q_lo, best_q - opt.q_step);
        double b = std::min(opt.q_hi, best_q + opt.q_step);
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        const auto eval = [&](double q) { return refine_width_location(pts, wing, q, best.params, opt); };
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        auto fc = eval(c), fd = eval(d);
        for (int it = 0; it < 24 && b - a > 1e-5; ++it) {
            if (fc.cost < fd.cost) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = eval(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = eval(d);
            }
        }
        const auto& cand = fc.cost < fd.cost ? fc : fd;
        if (cand.cost < best.cost) best = cand;
    }

    WingFit fit;
    fit.wing = wing;
    fit.params = best.params;
    fit.objective = best.cost;
    fit.n_points = pts.size();
    fit.iterations = best.iterations;
    fit.converged = best.converged;
    if (!fit.converged)
        throw FitNonConvergence("q-Gaussian " + std::string(to_string(wing)) + " wing fit did not meet the gradient tolerance",
                                fit);
    return fit;
}

QGaussianFit fit(const EmpiricalCdf& ecdf, const FitOptions& options) {
    QGaussianFit out;
    out.left = fit_wing(ecdf, Wing::left, options);
    out.right = fit_wing(ecdf, Wing::right, options);
    out.fit_range = {options.range_lo, options.range_hi};
    return out;
}

}  // namespace fxmf
