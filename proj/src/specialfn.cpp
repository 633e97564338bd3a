#include "resbuild/specialfn.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "resbuild/errors.hpp"
#include "resbuild/units.hpp"

namespace resbuild {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;
constexpr double kMaxExponent = 700.0;

constexpr int kWeidemanN = 64;

struct WeidemanTable {
    double L;
    std::array<double, kWeidemanN> a;  // coefficient of Z^n
};

// Coefficients of the expansion of (L^2 + t^2) exp(-t^2) in the Malmquist
// basis, via a cosine sum over M = 2N equispaced angles.
WeidemanTable make_weideman() {
    WeidemanTable tab{};
    const int m = 2 * kWeidemanN;
    tab.L = std::sqrt(kWeidemanN / std::numbers::sqrt2);
    std::array<double, 2 * m> f{};
    for (int k = -m + 1; k <= m - 1; ++k) {
        const double t = tab.L * std::tan(0.5 * k * std::numbers::pi / m);
        f[k + m] = std::exp(-t * t) * (tab.L * tab.L + t * t);
    }
    for (int j = 1; j <= kWeidemanN; ++j) {
        double s = 0.0;
        for (int k = -m + 1; k <= m - 1; ++k) s += f[k + m] * std::cos(std::numbers::pi * j * k / m);
        tab.a[j - 1] = s / (2.0 * m);
    }
    return tab;
}

const WeidemanTable& weideman() {
    static const WeidemanTable tab = make_weideman();
    return tab;
}

cplx w_taylor(cplx z) {
    // w(z) = sum_n (iz)^n / Gamma(n/2 + 1)
    const cplx iz = I * z;
    cplx term_even = 1.0;                  // (iz)^{2j} / j!
    cplx term_odd = iz * 2.0 * kInvSqrtPi;  // (iz)^{2j+1} / Gamma(j + 3/2)
    cplx sum = term_even + term_odd;
    const cplx iz2 = iz * iz;
    for (int j = 1; j < 200; ++j) {
        term_even *= iz2 / static_cast<double>(j);
        term_odd *= iz2 / (j + 0.5);
        sum += term_even + term_odd;
        if (std::abs(term_even) + std::abs(term_odd) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

cplx w_continued_fraction(cplx z, int terms) {
    cplx t = 0.0;
    for (int n = terms; n >= 1; --n) t = (0.5 * n) / (z - t);
    return I * kInvSqrtPi / (z - t);
}

cplx w_weideman(cplx z) {
    const auto& tab = weideman();
    const cplx lz = tab.L - I * z;
    const cplx zz = (tab.L + I * z) / lz;
    cplx p = tab.a[kWeidemanN - 1];
    for (int n = kWeidemanN - 2; n >= 0; --n) p = p * zz + tab.a[n];
    return 2.0 * p / (lz * lz) + kInvSqrtPi / lz;
}

cplx w_upper(cplx z) {
    const double x = z.real(), y = z.imag();
    const double r2 = x * x + y * y;
    if (r2 < 1.5 * 1.5) return w_taylor(z);
    const double rho2 = (x / 6.3) * (x / 6.3) + (y / 4.4) * (y / 4.4);
    if (rho2 >= 1.0) {
        const double rho = std::sqrt(rho2);
        const int terms = 10 + static_cast<int>(1442.0 / (26.0 * rho + 77.0));
        return w_continued_fraction(z, terms);
    }
    return w_weideman(z);
}

}  // namespace

FaddeevaValue faddeeva_checked(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("faddeeva: non-finite argument");
    if (z.imag() == 0.0) {
        // real axis: the real part is exactly exp(-x^2)
        return {cplx(std::exp(-z.real() * z.real()), w_upper(z).imag()), false};
    }
    if (z.imag() > 0.0) return {w_upper(z), false};
    const cplx mz2 = -z * z;
    FaddeevaValue out;
    if (mz2.real() > kMaxExponent) {
        out.value = 2.0 * std::exp(cplx(kMaxExponent, mz2.imag()));
        out.saturated = true;
        return out;
    }
    out.value = 2.0 * std::exp(mz2) - w_upper(-z);
    return out;
}

cplx faddeeva(cplx z) { return faddeeva_checked(z).value; }

cplx moshinsky_argument(cplx q, double t_ps, double mass_ratio) {
    if (!(t_ps >= 0.0)) throw DomainError("moshinsky: time must be non-negative");
    const double c = std::sqrt(0.5 * units::hbar_over_mass(mass_ratio) * t_ps);
    return -std::polar(1.0, -0.25 * std::numbers::pi) * q * c;
}

cplx moshinsky(cplx q, double t_ps, double mass_ratio) {
    return 0.5 * faddeeva(I * moshinsky_argument(q, t_ps, mass_ratio));
}

cplx moshinsky_at(double x_nm, cplx q, double t_ps, double mass_ratio) {
    if (!(t_ps >= 0.0)) throw DomainError("moshinsky: time must be non-negative");
    if (t_ps == 0.0) {
        // step: the plane wave for x < 0, nothing beyond
        if (x_nm < 0.0) return std::exp(I * q * x_nm);
        return x_nm == 0.0 ? cplx(0.5) : cplx(0.0);
    }
    const double hm = units::hbar_over_mass(mass_ratio);
    const double a = 1.0 / std::sqrt(2.0 * hm * t_ps);  // sqrt(m / 2 hbar t)
    const cplx y = std::polar(1.0, -0.25 * std::numbers::pi) * a * (x_nm - hm * q * t_ps);
    const cplx iy = I * y;
    // combine the Gaussian prefactor with exp(-(iy)^2) analytically in the
    // lower half-plane to avoid overflow at small t
    if (iy.imag() < 0.0) {
        const cplx phase = I * x_nm * x_nm * a * a;  // i m x^2 / 2 hbar t
        return std::exp(phase + y * y) - 0.5 * std::exp(phase) * faddeeva(-iy);
    }
    return 0.5 * std::exp(I * x_nm * x_nm * a * a) * faddeeva(iy);
}

}  // namespace resbuild
