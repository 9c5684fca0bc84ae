#pragma once

namespace fxmf {

/// Gauss hypergeometric function 2F1(a, b; c; z) for real arguments, z <= 1.
///
/// Evaluation strategy:
///   |z| < 0.9        defining power series
///   z <= -0.9        Pfaff transformation z -> z/(z-1), then the series in
///                    the new argument
///   0.9 <= z < 1     series when all terms are positive and z <= 0.999,
///                    otherwise the linear transformation to 1 - z (with the
///                    logarithmic forms when c - a - b is an integer)
/// Terminating series (a or b a non-positive integer) and the closed forms
/// for b == c or a == c are handled directly.
///
/// Throws DomainError when c is a non-positive integer, when z > 1, or when
/// the series diverges at z == 1.
double hyp2f1(double a, double b, double c, double z);

/// 2F1 by plain summation of the defining series. Requires |z| < 1.
/// Exposed so callers (and tests) can bypass the transformation logic.
double hyp2f1_series(double a, double b, double c, double z);

}  // namespace fxmf
