#include "fxmf/special.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>

#include "fxmf/error.hpp"

namespace fxmf {
namespace {

constexpr int kMaxTerms = 200000;
constexpr long double kEps = std::numeric_limits<double>::epsilon() * 0.25;

bool near_integer(double x) { return std::fabs(x - std::round(x)) <= 1e-13 * std::max(1.0, std::fabs(x)); }
bool is_nonpositive_integer(double x) { return x <= 0.0 && near_integer(x); }

// log|Gamma(x)| and sign; sign == 0 marks a pole.
struct SignedLog {
    double log_abs = 0.0;
    int sign = 1;
};

SignedLog log_gamma(double x) {
    if (is_nonpositive_integer(x)) return {0.0, 0};
    int sign = 1;
    const double lg = ::lgamma_r(x, &sign);
    return {lg, sign};
}

// prod Gamma(num) / prod Gamma(den). Poles in the denominator give 0.
double gamma_ratio(std::initializer_list<double> num, std::initializer_list<double> den) {
    double log_sum = 0.0;
    int sign = 1;
    for (double x : den) {
        const auto g = log_gamma(x);
        if (g.sign == 0) return 0.0;
        log_sum -= g.log_abs;
        sign *= g.sign;
    }
    for (double x : num) {
        const auto g = log_gamma(x);
        if (g.sign == 0) throw DomainError("hyp2f1: gamma pole at " + std::to_string(x));
        log_sum += g.log_abs;
        sign *= g.sign;
    }
    return sign * std::exp(log_sum);
}

double psi(double x) { return boost::math::digamma(x); }

// Power series; exact for terminating parameters. |z| < 1 unless terminating.
double sum_series(double a, double b, double c, double z) {
    long double term = 1.0L, sum = 1.0L;
    int small_terms = 0;
    for (int k = 0; k < kMaxTerms; ++k) {
        term *= (static_cast<long double>(a) + k) * (static_cast<long double>(b) + k) /
                ((static_cast<long double>(c) + k) * (k + 1.0L)) * z;
        sum += term;
        if (term == 0.0L) return static_cast<double>(sum);
        if (std::fabs(term) <= kEps * std::fabs(sum)) {
            if (++small_terms >= 2) return static_cast<double>(sum);
        } else {
            small_terms = 0;
        }
    }
    throw DomainError("hyp2f1: series did not converge for z = " + std::to_string(z));
}

// 1 - z transformation, z in [0.9, 1).
double near_one(double a, double b, double c, double z) {
    const double u = 1.0 - z;
    const double m = c - a - b;
    if (!near_integer(m)) {
        const double t1 = gamma_ratio({c, m}, {c - a, c - b});
        const double t2 = gamma_ratio({c, -m}, {a, b});
        double result = 0.0;
        if (t1 != 0.0) result += t1 * hyp2f1(a, b, 1.0 - m, u);
        if (t2 != 0.0) result += t2 * std::pow(u, m) * hyp2f1(c - a, c - b, 1.0 + m, u);
        return result;
    }
    const int mi = static_cast<int>(std::lround(m));
    if (mi < 0) {
        // Euler: F(a,b;c;z) = (1-z)^(c-a-b) F(c-a, c-b; c; z) flips the sign of m.
        return std::pow(u, m) * near_one(c - a, c - b, c, z);
    }
    // Logarithmic case c = a + b + m, m = 0, 1, 2, ...
    const double ln_u = std::log(u);
    long double finite = 0.0L;
    if (mi > 0) {
        long double poch = 1.0L;  // (a)_k (b)_k / k!
        long double zm1_pow = 1.0L;
        for (int k = 0; k < mi; ++k) {
            long double fact = 1.0L;  // (m - k - 1)!
            for (int j = 2; j <= mi - k - 1; ++j) fact *= j;
            finite += poch * fact * zm1_pow;
            poch *= (static_cast<long double>(a) + k) * (static_cast<long double>(b) + k) / (k + 1.0L);
            zm1_pow *= -u;
        }
        finite *= gamma_ratio({}, {a + mi, b + mi});
    }
    long double inf_sum = 0.0L;
    {
        long double coeff = 1.0L;  // (a+m)_k (b+m)_k / (k! (k+m)!)
        for (int j = 2; j <= mi; ++j) coeff /= j;
        long double upow = 1.0L;
        int small_terms = 0;
        for (int k = 0; k < kMaxTerms; ++k) {
            const double bracket = ln_u - psi(k + 1.0) - psi(k + mi + 1.0) + psi(a + k + mi) + psi(b + k + mi);
            const long double term = coeff * upow * bracket;
            inf_sum += term;
            if (std::fabs(term) <= kEps * std::fabs(inf_sum)) {
                if (++small_terms >= 2) break;
            } else {
                small_terms = 0;
            }
            coeff *= (static_cast<long double>(a) + mi + k) * (static_cast<long double>(b) + mi + k) /
                     ((k + 1.0L) * (k + mi + 1.0L));
            upow *= u;
        }
    }
    const double zm1_m = std::pow(-u, mi);
    const long double regularized = finite - zm1_m * gamma_ratio({}, {a, b}) * inf_sum;
    return static_cast<double>(regularized) * gamma_ratio({c}, {});
}

// Argument in (0, 1) after an optional Pfaff step.
double unit_interval(double a, double b, double c, double w) {
    if (w < 0.9 || is_nonpositive_integer(a) || is_nonpositive_integer(b)) return sum_series(a, b, c, w);
    // All-positive terms converge without cancellation; accept the slower
    // convergence up to w = 0.999 (~4e4 terms).
    if (a > 0.0 && b > 0.0 && c > 0.0 && w <= 0.999) return sum_series(a, b, c, w);
    return near_one(a, b, c, w);
}

}  // namespace

double hyp2f1_series(double a, double b, double c, double z) {
    if (is_nonpositive_integer(c)) throw DomainError("hyp2f1: c is a non-positive integer");
    if (!(std::fabs(z) < 1.0) && !is_nonpositive_integer(a) && !is_nonpositive_integer(b))
        throw DomainError("hyp2f1_series: |z| must be < 1");
    return sum_series(a, b, c, z);
}

double hyp2f1(double a, double b, double c, double z) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z))
        throw DomainError("hyp2f1: non-finite argument");
    if (is_nonpositive_integer(c)) throw DomainError("hyp2f1: c = " + std::to_string(c) + " is a non-positive integer");
    if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
    if (z > 1.0) throw DomainError("hyp2f1: z = " + std::to_string(z) + " > 1 is outside the real domain");

    const bool terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    if (terminating) return sum_series(a, b, c, z);

    if (z == 1.0) {
        if (c - a - b > 0.0) return gamma_ratio({c, c - a - b}, {c - a, c - b});
        throw DomainError("hyp2f1: series diverges at z = 1 when c - a - b <= 0");
    }
    if (b == c) return std::pow(1.0 - z, -a);
    if (a == c) return std::pow(1.0 - z, -b);

    if (std::fabs(z) < 0.9) return sum_series(a, b, c, z);
    if (z <= -0.9) {
        // Pfaff: F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1)). Pick the
        // variant whose transformed series keeps positive terms when possible.
        const double w = z / (z - 1.0);
        const bool use_a = (c - b > 0.0 && a > 0.0) || !(c - a > 0.0 && b > 0.0);
        if (use_a) return std::pow(1.0 - z, -a) * unit_interval(a, c - b, c, w);
        return std::pow(1.0 - z, -b) * unit_interval(c - a, b, c, w);
    }
    return unit_interval(a, b, c, z);
}

}  // namespace fxmf
