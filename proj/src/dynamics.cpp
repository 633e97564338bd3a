#include "resbuild/dynamics.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

#include <algorithm>
#include <cmath>
#include <numbers>

#include "resbuild/errors.hpp"
#include "resbuild/scattering.hpp"
#include "resbuild/specialfn.hpp"
#include "resbuild/units.hpp"

namespace resbuild {

namespace {

// Flush subnormals to zero for the duration of the grid propagation: the
// evanescent tails of the wave otherwise spend most of the run in slow
// denormal arithmetic. Values that small are far below the accuracy of the
// scheme anyway.
class FlushDenormals {
public:
#if defined(__SSE2__)
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#endif
};

constexpr cplx I{0.0, 1.0};

}  // namespace

BuildupModel::BuildupModel(PotentialProfile profile, double energy, int max_pole_pairs)
    : BuildupModel(profile, energy,
                   first_resonances(profile, static_cast<std::size_t>(std::max(max_pole_pairs, 1)))) {}

BuildupModel::BuildupModel(PotentialProfile profile, double energy, std::vector<Resonance> resonances)
    : profile_(std::move(profile)), energy_(energy), resonances_(std::move(resonances)) {
    if (!(energy_ > 0.0)) throw DomainError("BuildupModel: energy must be positive");
    if (resonances_.empty()) throw DomainError("BuildupModel: at least one resonance is required");
    k_ = units::wavenumber_from_energy(energy_, profile_.mass_ratio());
    for (const auto& r : resonances_) {
        if (std::abs(k_ * k_ - r.k_pole * r.k_pole) < 1e-12)
            throw DomainError("incidence energy coincides with a pole; detune E or use the one-level resonant limit");
    }
}

cplx BuildupModel::stationary(double x) const { return stationary_value(profile_, energy_, x); }

BuildupModel::PointData BuildupModel::point(double x) const {
    if (x < 0.0 || x > profile_.length()) throw DomainError("BuildupModel: x outside the internal region [0, L]");
    PointData p;
    p.x = x;
    p.phi = stationary(x);
    p.pole_coeff.reserve(resonances_.size());
    for (const auto& r : resonances_) {
        const cplx un_x = resonant_state_value(profile_, r, x);
        p.pole_coeff.push_back(2.0 * k_ * r.u_at_0 * un_x / (k_ * k_ - r.k_pole * r.k_pole));
    }
    return p;
}

cplx BuildupModel::psi(const PointData& p, double t_ps, int pole_pairs) const {
    if (pole_pairs < 1 || pole_pairs > max_pole_pairs())
        throw DomainError("BuildupModel: pole_pairs must lie in [1, " + std::to_string(max_pole_pairs()) + "]");
    if (!(t_ps >= 0.0)) throw DomainError("BuildupModel: time must be non-negative");
    const double mass = profile_.mass_ratio();
    cplx out = p.phi * moshinsky(k_, t_ps, mass) - std::conj(p.phi) * moshinsky(-k_, t_ps, mass);
    cplx sum = 0.0;
    for (int n = 0; n < pole_pairs; ++n) {
        const cplx kn = resonances_[n].k_pole;
        // mirror pole -conj(k_n) carries coefficient conj(phi_n) for real k
        sum += p.pole_coeff[n] * moshinsky(kn, t_ps, mass) +
               std::conj(p.pole_coeff[n]) * moshinsky(-std::conj(kn), t_ps, mass);
    }
    return out - I * sum;
}

cplx BuildupModel::psi(double x, double t_ps, int pole_pairs) const { return psi(point(x), t_ps, pole_pairs); }

cplx internal_wavefunction(const PotentialProfile& profile, double energy, double x, double t_ps, int pole_pairs) {
    const BuildupModel model(profile, energy, pole_pairs);
    return model.psi(x, t_ps, pole_pairs);
}

BuildupCurve time_series(const BuildupModel& model, double x0, std::span<const double> t_grid, int pole_pairs,
                         bool normalize) {
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("time_series: t_grid must be strictly increasing");
    const auto p = model.point(x0);
    BuildupCurve c;
    c.label = model.profile().label();
    c.energy = model.energy();
    c.x0 = x0;
    c.pole_count = pole_pairs;
    c.normalized = normalize;
    const double phi2 = std::norm(p.phi);
    const double lifetime = units::lifetime_from_width(model.resonances().front().width());
    c.abscissa.reserve(t_grid.size());
    c.values.reserve(t_grid.size());
    for (double t : t_grid) {
        const double d = std::norm(model.psi(p, t, pole_pairs));
        c.abscissa.push_back(normalize ? t / lifetime : t);
        c.values.push_back(normalize ? d / phi2 : d);
    }
    return c;
}

Snapshot snapshot(const BuildupModel& model, std::span<const double> times, std::span<const double> x_grid,
                  int pole_pairs) {
    Snapshot s;
    s.x.assign(x_grid.begin(), x_grid.end());
    s.times.assign(times.begin(), times.end());
    s.density.assign(times.size(), std::vector<double>(x_grid.size()));
    s.stationary.reserve(x_grid.size());
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
        const auto p = model.point(x_grid[j]);
        s.stationary.push_back(std::norm(p.phi));
        for (std::size_t i = 0; i < times.size(); ++i) s.density[i][j] = std::norm(model.psi(p, times[i], pole_pairs));
    }
    return s;
}

namespace {

// Potential at a grid node; nodes on an interface take the mean of both
// sides so the discrete well keeps its width to second order in dx.
double node_potential(const PotentialProfile& profile, double x, double dx) {
    const double eps = 1e-9 * dx;
    for (std::size_t i = 0; i <= profile.segments().size(); ++i) {
        if (std::abs(x - profile.boundary(i)) < eps)
            return 0.5 * (potential_at(profile, x - 0.5 * dx) + potential_at(profile, x + 0.5 * dx));
    }
    return potential_at(profile, x);
}

// Quadratic absorber W(s) = strength * (s / width)^2 for depth s into the layer.
double absorber(double depth, double width, double strength) {
    if (depth <= 0.0) return 0.0;
    const double r = depth / width;
    return strength * r * r;
}

// Reflection probability of the discretized absorbing layer for a plane wave
// of energy e incident from free space, from the stationary discrete problem
// with a Dirichlet wall behind the layer.
double absorber_reflection(double energy, double c, double dx, double width, double strength) {
    const int n_free = 200;
    const int n_abs = static_cast<int>(std::ceil(width / dx));
    const int n = n_free + n_abs;
    // discrete wavenumber of the free region
    const double cosk = 1.0 - energy * dx * dx / (2.0 * c);
    const double kd = std::acos(std::clamp(cosk, -1.0, 1.0));
    // march from the wall (psi_n = 0, psi_{n-1} = 1) back into free space
    std::vector<cplx> psi(n + 1);
    psi[n] = 0.0;
    psi[n - 1] = 1.0;
    for (int j = n - 1; j >= 1; --j) {
        const double depth = (j - n_free) * dx;
        const cplx v = cplx(0.0, -absorber(depth, width, strength));
        // -c (psi_{j+1} - 2 psi_j + psi_{j-1}) / dx^2 + v psi_j = E psi_j
        psi[j - 1] = 2.0 * psi[j] - psi[j + 1] + (v - energy) * psi[j] * dx * dx / c;
    }
    // split free-region samples j = 0, 1 into e^{ikj} and e^{-ikj} parts
    const cplx e = std::exp(I * kd);
    // psi_0 = A + B, psi_1 = A e + B / e
    const cplx a = (psi[1] - psi[0] / e) / (e - 1.0 / e);
    const cplx b = psi[0] - a;
    return std::norm(b / a);
}

}  // namespace

BuildupCurve crank_nicolson_reference(const PotentialProfile& profile, double energy, double x0,
                                      std::span<const double> t_grid, GridOracleSettings s) {
    if (!(energy > 0.0)) throw DomainError("crank_nicolson_reference: energy must be positive");
    if (t_grid.empty()) throw DomainError("crank_nicolson_reference: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0)) throw DomainError("crank_nicolson_reference: negative time");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw DomainError("crank_nicolson_reference: t_grid must be strictly increasing");
    }
    if (!(s.dx > 0.0 && s.dx <= 0.01 + 1e-15)) throw DomainError("crank_nicolson_reference: dx must be in (0, 0.01] nm");
    if (!(s.dt > 0.0 && s.dt <= 1e-4 + 1e-18)) throw DomainError("crank_nicolson_reference: dt must be in (0, 1e-4] ps");

    const double mass = profile.mass_ratio();
    const double c = units::PhysicalConstants::hbar2_over_2me / mass;  // eV nm^2
    const double hbar = units::PhysicalConstants::hbar;
    const double k = units::wavenumber_from_energy(energy, mass);
    const double lambda = 2.0 * std::numbers::pi / k;
    const double v = units::hbar_over_mass(mass) * k;  // nm/ps
    const double t_max = t_grid.back();
    const double spread = std::sqrt(units::hbar_over_mass(mass) * std::max(t_max, 1e-6));

    if (s.taper_width <= 0.0) s.taper_width = 20.0 * lambda;
    if (s.absorber_width <= 0.0) s.absorber_width = 10.0 * lambda;
    const double sigma = s.taper_width / 6.0;
    const double needed_left = v * t_max + s.taper_width + 8.0 * sigma + 4.0 * spread;
    if (s.left_extent <= 0.0) s.left_extent = std::max(40.0 * lambda, needed_left);
    if (s.right_extent <= 0.0) s.right_extent = 40.0 * lambda;

    if (s.left_extent < needed_left)
        throw NumericalError("crank_nicolson_reference: left domain too short; the truncated incident wave reaches "
                             "the structure before t_max");

    // resolution diagnostics: accumulated phase error of the scheme
    const double omega = energy / hbar;
    const double time_phase_error = omega * omega * omega * s.dt * s.dt * t_max / 12.0;
    const double space_phase_error = omega * t_max * k * k * s.dx * s.dx / 12.0;
    if (time_phase_error + space_phase_error > 0.01)
        throw NumericalError("crank_nicolson_reference: dt/dx too coarse for t_max (phase error > 1%)");

    // absorber strength chosen for minimal reflection at the incident energy
    double strength = 0.0, best = 1e300;
    for (double f = 0.05; f <= 20.0; f *= 1.15) {
        const double w = f * energy;
        const double r = absorber_reflection(energy, c, s.dx, s.absorber_width, w);
        if (r < best) {
            best = r;
            strength = w;
        }
    }
    if (best > 1e-2)
        throw NumericalError("crank_nicolson_reference: absorber reflection above 1% (" + std::to_string(best) + ")");

    // grid nodes x_j = x_min + j dx with x = 0 on a node
    const long left_nodes = static_cast<long>(std::ceil((s.left_extent + s.absorber_width) / s.dx));
    const long right_nodes =
        static_cast<long>(std::ceil((profile.length() + s.right_extent + s.absorber_width) / s.dx));
    const double x_min = -left_nodes * s.dx;
    const std::size_t n = static_cast<std::size_t>(left_nodes + right_nodes + 1);
    const double left_abs_edge = -s.left_extent;
    const double right_abs_edge = profile.length() + s.right_extent;
    const double taper_center = -s.left_extent + 0.5 * s.taper_width;

    std::vector<cplx> diag(n);
    std::vector<cplx> psi(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = x_min + static_cast<double>(j) * s.dx;
        const double vr = node_potential(profile, x, s.dx);
        const double w = absorber(left_abs_edge - x, s.absorber_width, strength) +
                         absorber(x - right_abs_edge, s.absorber_width, strength);
        diag[j] = cplx(vr, -w);
        if (x <= 0.0) {
            const double window = 0.5 * (1.0 + std::erf((x - taper_center) / (std::sqrt(2.0) * sigma)));
            psi[j] = 2.0 * I * std::sin(k * x) * window;
        }
    }

    // A = 1 + i dt H / (2 hbar), tridiagonal with constant off-diagonal.
    // Thomas factors: b = 2 - A_jj for the explicit half, inv_piv, and
    // cp = off / piv for the back substitution.
    struct Factors {
        std::vector<cplx> b, inv_piv, cp;
        cplx off;
    };
    auto factor = [&](double dt) {
        Factors f;
        const cplx alpha = I * dt / (2.0 * hbar);
        f.off = -alpha * c / (s.dx * s.dx);
        f.b.resize(n);
        f.inv_piv.resize(n);
        f.cp.resize(n);
        cplx prev = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const cplx a = 1.0 + alpha * (2.0 * c / (s.dx * s.dx) + diag[j]);
            f.b[j] = 2.0 - a;
            f.inv_piv[j] = 1.0 / (a - f.off * prev);
            prev = f.cp[j] = f.off * f.inv_piv[j];
        }
        return f;
    };

    std::vector<cplx> d(n);
    auto step = [&](const Factors& f) {
        // explicit half fused with the forward sweep; psi is untouched until
        // the back substitution
        const cplx off = f.off;
        cplx prev = 0.0, left = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const cplx right = j + 1 < n ? psi[j + 1] : cplx(0.0);
            const cplx r = f.b[j] * psi[j] - off * (left + right);
            left = psi[j];
            prev = (r - off * prev) * f.inv_piv[j];
            d[j] = prev;
        }
        psi[n - 1] = d[n - 1];
        for (std::size_t j = n - 1; j-- > 0;) psi[j] = d[j] - f.cp[j] * psi[j + 1];
    };

    const Factors main_factors = factor(s.dt);
    const FlushDenormals ftz;

    const double pos = (x0 - x_min) / s.dx;
    const std::size_t j0 = static_cast<std::size_t>(std::floor(pos));
    if (j0 + 1 >= n) throw DomainError("crank_nicolson_reference: x0 outside the grid");
    const double frac = pos - static_cast<double>(j0);

    BuildupCurve out;
    out.label = profile.label() + " (Crank-Nicolson)";
    out.energy = energy;
    out.x0 = x0;
    out.pole_count = 0;
    double t = 0.0;
    for (double target : t_grid) {
        const long full = static_cast<long>(std::floor((target - t) / s.dt + 1e-9));
        for (long i = 0; i < full; ++i) step(main_factors);
        t += full * s.dt;
        const double rest = target - t;
        if (rest > 1e-9 * s.dt) {
            step(factor(rest));
            t = target;
        }
        const cplx val = (1.0 - frac) * psi[j0] + frac * psi[j0 + 1];
        out.abscissa.push_back(target);
        out.values.push_back(std::norm(val));
    }
    return out;
}

}  // namespace resbuild
