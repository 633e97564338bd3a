#pragma once

#include <complex>

namespace resbuild {

using cplx = std::complex<double>;

struct FaddeevaValue {
    cplx value;
    /// Lower half-plane evaluation where exp(-z^2) exceeded exp(700); the
    /// magnitude has been clamped to exp(700) with the phase kept.
    bool saturated = false;
};

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz).
///
/// Upper half-plane: Taylor series for |z| < 1.5, Laplace continued fraction
/// outside the ellipse (x/6.3)^2 + (y/4.4)^2 = 1, and a Weideman rational
/// approximation (64 terms) in between; relative error below 1e-13 across
/// the region boundaries. Lower half-plane via w(z) = 2 exp(-z^2) - w(-z).
FaddeevaValue faddeeva_checked(cplx z);
cplx faddeeva(cplx z);

/// Argument y_q = -exp(-i pi/4) q sqrt(hbar t / 2m) of the shutter kernel.
cplx moshinsky_argument(cplx q, double t_ps, double mass_ratio);

/// Moshinsky function at the shutter, M(0, q; t) = w(i y_q) / 2.
cplx moshinsky(cplx q, double t_ps, double mass_ratio);

/// Moshinsky function at position x (nm):
/// M(x, q; t) = exp(i m x^2 / 2 hbar t) w(i y) / 2 with
/// y = exp(-i pi/4) sqrt(m / 2 hbar t) (x - hbar q t / m).
/// Free shutter solution is M(x, k; t) - M(x, -k; t).
cplx moshinsky_at(double x_nm, cplx q, double t_ps, double mass_ratio);

}  // namespace resbuild
