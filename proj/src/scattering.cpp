#include "resbuild/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "resbuild/errors.hpp"
#include "resbuild/units.hpp"

namespace resbuild {

namespace {

constexpr cplx I{0.0, 1.0};

// |Im(qw)| beyond which cos/sin are evaluated with the growing exponential
// factored out.
constexpr double kScaleThreshold = 30.0;

}  // namespace

ScaledMatrix ScaledMatrix::operator*(const ScaledMatrix& r) const {
    ScaledMatrix out;
    out.a11 = a11 * r.a11 + a12 * r.a21;
    out.a12 = a11 * r.a12 + a12 * r.a22;
    out.a21 = a21 * r.a11 + a22 * r.a21;
    out.a22 = a21 * r.a12 + a22 * r.a22;
    out.log_scale = log_scale + r.log_scale;
    out.normalize();
    return out;
}

void ScaledMatrix::normalize() {
    const double m = std::max({std::abs(a11), std::abs(a12), std::abs(a21), std::abs(a22)});
    if (!(m > 0.0) || !std::isfinite(m)) return;
    // only rescale when the mantissa drifts far from unity
    if (m > 1e100 || m < 1e-100) {
        const double e = std::log(m);
        a11 /= m;
        a12 /= m;
        a21 /= m;
        a22 /= m;
        log_scale += e;
    }
}

std::array<cplx, 2> ScaledMatrix::apply(const std::array<cplx, 2>& v) const {
    const double f = std::exp(log_scale);
    return {(a11 * v[0] + a12 * v[1]) * f, (a21 * v[0] + a22 * v[1]) * f};
}

ScaledMatrix layer_propagator(cplx q2, double width) {
    ScaledMatrix p;
    const cplx x2 = q2 * width * width;  // (q w)^2
    if (std::abs(x2) < 1e-6) {
        // Taylor series in (q w)^2
        const cplx c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0 - x2 * x2 * x2 / 720.0;
        const cplx s_over = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0;  // sin(z)/z
        p.a11 = c;
        p.a12 = width * s_over;
        p.a21 = -q2 * width * s_over;
        p.a22 = c;
        return p;
    }
    const cplx q = std::sqrt(q2);
    const cplx z = q * width;
    cplx c, s;
    const double shift = std::abs(z.imag());
    if (shift > kScaleThreshold) {
        const cplx ep = std::exp(I * z - shift);
        const cplx em = std::exp(-I * z - shift);
        c = 0.5 * (ep + em);
        s = (ep - em) / (2.0 * I);
        p.log_scale = shift;
    } else {
        c = std::cos(z);
        s = std::sin(z);
    }
    p.a11 = c;
    p.a12 = s / q;
    p.a21 = -q * s;
    p.a22 = c;
    return p;
}

std::vector<cplx> layer_q2(const PotentialProfile& profile, cplx k) {
    const double f = units::two_m_over_hbar2(profile.mass_ratio());
    std::vector<cplx> out;
    out.reserve(profile.segments().size());
    for (const auto& s : profile.segments()) out.push_back(k * k - f * s.height_ev);
    return out;
}

ScaledMatrix structure_propagator(const PotentialProfile& profile, cplx k) {
    const auto q2 = layer_q2(profile, k);
    ScaledMatrix total;
    for (std::size_t j = 0; j < q2.size(); ++j)
        total = layer_propagator(q2[j], profile.segments()[j].width_nm) * total;
    return total;
}

std::vector<std::array<cplx, 2>> propagate_state(const PotentialProfile& profile, cplx k,
                                                 std::array<cplx, 2> state_at_zero,
                                                 std::span<const double> grid) {
    const double len = profile.length();
    const double tol = 1e-12 * std::max(1.0, len);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= -tol && grid[i] <= len + tol))
            throw DomainError("grid point outside [0, L]");
        if (i > 0 && grid[i] < grid[i - 1]) throw DomainError("grid must be sorted");
    }
    const auto q2 = layer_q2(profile, k);
    const std::size_t n = q2.size();

    std::vector<std::array<cplx, 2>> at_edge(n + 1);
    at_edge[0] = state_at_zero;
    for (std::size_t j = 0; j < n; ++j)
        at_edge[j + 1] = layer_propagator(q2[j], profile.segments()[j].width_nm).apply(at_edge[j]);

    std::vector<std::array<cplx, 2>> out;
    out.reserve(grid.size());
    for (double x : grid) {
        x = std::clamp(x, 0.0, len);
        const std::size_t j = profile.segment_index(x);
        const double dx = x - profile.boundary(j);
        if (dx == 0.0) {
            out.push_back(at_edge[j]);
        } else {
            out.push_back(layer_propagator(q2[j], dx).apply(at_edge[j]));
        }
    }
    return out;
}

cplx TransferMatrix::m11() const { return m_.a11 * std::exp(m_.log_scale); }
cplx TransferMatrix::m12() const { return m_.a12 * std::exp(m_.log_scale); }
cplx TransferMatrix::m21() const { return m_.a21 * std::exp(m_.log_scale); }
cplx TransferMatrix::m22() const { return m_.a22 * std::exp(m_.log_scale); }

cplx TransferMatrix::det() const {
    return (m_.a11 * m_.a22 - m_.a12 * m_.a21) * std::exp(2.0 * m_.log_scale);
}

cplx TransferMatrix::transmission_amplitude() const {
    // det = 1 (equal leads); forming it explicitly cancels catastrophically
    // for opaque structures
    return std::exp(-m_.log_scale) / m_.a22;
}

cplx TransferMatrix::reflection_amplitude() const { return -m_.a21 / m_.a22; }

TransferMatrix TransferMatrix::shifted(double dx) const {
    // (A, B) in coordinates x' = x - dx are (A e^{ik dx}, B e^{-ik dx})
    const cplx e = std::exp(I * k_ * dx);
    ScaledMatrix s = m_;
    s.a12 /= e * e;
    s.a21 *= e * e;
    return TransferMatrix(s, k_);
}

TransferMatrix TransferMatrix::operator*(const TransferMatrix& rhs) const {
    if (k_ != rhs.k_) throw DomainError("transfer matrices at different k cannot be composed");
    return TransferMatrix(m_ * rhs.m_, k_);
}

TransferMatrix transfer_matrix(const PotentialProfile& profile, cplx k) {
    if (k == cplx(0.0)) throw DomainError("transfer_matrix: k = 0 is singular");
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw DomainError("transfer_matrix: non-finite k");
    const ScaledMatrix p = structure_propagator(profile, k);
    const double len = profile.length();

    // W(0): plane-wave amplitudes -> (psi, psi') at x = 0
    ScaledMatrix w0;
    w0.a11 = 1.0;
    w0.a12 = 1.0;
    w0.a21 = I * k;
    w0.a22 = -I * k;

    // W(L)^{-1}: (psi, psi') at x = L -> amplitudes of e^{ikx}, e^{-ikx}
    const cplx e = std::exp(I * k * len);
    const cplx inv_det = 1.0 / (-2.0 * I * k);
    ScaledMatrix wl_inv;
    wl_inv.a11 = -I * k / e * inv_det;
    wl_inv.a12 = -1.0 / e * inv_det;
    wl_inv.a21 = -I * k * e * inv_det;
    wl_inv.a22 = e * inv_det;

    return TransferMatrix(wl_inv * (p * w0), k);
}

double transmission(const PotentialProfile& profile, double energy) {
    if (!(energy > 0.0)) throw DomainError("transmission: energy must be positive");
    const double k = units::wavenumber_from_energy(energy, profile.mass_ratio());
    const double t = std::norm(transfer_matrix(profile, k).transmission_amplitude());
    return std::min(t, 1.0);
}

ScatteringSolution stationary_wavefunction(const PotentialProfile& profile, double energy,
                                           std::span<const double> grid) {
    if (!(energy > 0.0)) throw DomainError("stationary_wavefunction: energy must be positive");
    ScatteringSolution sol;
    const double k = units::wavenumber_from_energy(energy, profile.mass_ratio());
    const auto tm = transfer_matrix(profile, k);
    sol.k = k;
    sol.t_amp = tm.transmission_amplitude();
    sol.r_amp = tm.reflection_amplitude();
    sol.x.assign(grid.begin(), grid.end());

    const std::array<cplx, 2> at_zero{1.0 + sol.r_amp, I * k * (1.0 - sol.r_amp)};
    const auto states = propagate_state(profile, k, at_zero, grid);
    sol.phi.reserve(states.size());
    sol.dphi.reserve(states.size());
    for (const auto& s : states) {
        sol.phi.push_back(s[0]);
        sol.dphi.push_back(s[1]);
    }
    return sol;
}

cplx stationary_value(const PotentialProfile& profile, double energy, double x) {
    const double grid[1] = {x};
    return stationary_wavefunction(profile, energy, grid).phi.front();
}

double solve_energy_for_gamma(const PotentialProfile& profile, double resonance_energy, double width,
                              double gamma, Side side) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("solve_energy_for_gamma: gamma must lie in (0, 1]");
    if (!(width > 0.0)) throw DomainError("solve_energy_for_gamma: width must be positive");
    if (gamma == 1.0) return resonance_energy;

    const double target = gamma * transmission(profile, resonance_energy);
    auto f = [&](double e) { return transmission(profile, e) - target; };

    // inner end sits on the peak (f > 0), outer end must be below the target
    double inner = resonance_energy;
    double outer = side == Side::below ? resonance_energy - 10.0 * width : resonance_energy + 10.0 * width;
    if (outer <= 0.0) outer = 0.5 * resonance_energy;
    if (!(f(outer) < 0.0))
        throw NumericalError("solve_energy_for_gamma: no crossing within 10 widths (gamma too small for an isolated resonance)");

    constexpr double tol = 1e-4 * units::mev;
    for (int it = 0; it < 200 && std::abs(outer - inner) > 0.01 * tol; ++it) {
        const double mid = 0.5 * (inner + outer);
        if (f(mid) > 0.0) {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    return 0.5 * (inner + outer);
}

}  // namespace resbuild
