// Acceptance run: one PASS/FAIL line per criterion, details indented below.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "resbuild/cli.hpp"
#include "resbuild/dynamics.hpp"
#include "resbuild/onelevel.hpp"
#include "resbuild/resonances.hpp"
#include "resbuild/scattering.hpp"
#include "resbuild/specialfn.hpp"
#include "resbuild/units.hpp"

using namespace resbuild;
using units::mev;

namespace {

struct Target {
    const char* name;
    double eps_mev, width_mev, gamma_energy_mev;
};

// published first-resonance data and gamma = 0.01 energies
constexpr Target kTargets[] = {
    {"A", 80.11, 1.03, 74.97},
    {"B", 37.80, 0.12, 37.20},
    {"C", 51.29, 0.17, 50.44},
};

int failures = 0;

void report(int id, bool ok, const std::string& what) {
    std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <typename... Args>
void detail(const char* fmt, Args... args) {
    std::printf("    ");
    std::printf(fmt, args...);
    std::printf("\n");
}

std::vector<double> range(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

Resonance first_of(const PotentialProfile& p) {
    return locate_resonances(p, p.max_height(), 1).resonances.at(0);
}

void resonance_recovery() {
    bool ok = true;
    for (const auto& t : kTargets) {
        const auto r = first_of(preset(t.name));
        const double de = r.position() / mev - t.eps_mev, dg = r.width() / mev - t.width_mev;
        const bool pass = std::abs(de) <= 0.05 && std::abs(dg) <= 0.02;
        ok = ok && pass;
        detail("%s: eps1 = %.4f meV (target %.2f, off %+.4f), Gamma1 = %.5f meV (target %.2f, off %+.5f) %s", t.name,
               r.position() / mev, t.eps_mev, de, r.width() / mev, t.width_mev, dg, pass ? "ok" : "out of tolerance");
    }
    report(1, ok, "first resonance within 0.05 meV (position) and 0.02 meV (width)");
}

void gamma_energies() {
    bool ok = true;
    for (const auto& t : kTargets) {
        const auto p = preset(t.name);
        const auto r = first_of(p);
        const double e = solve_energy_for_gamma(p, r, 0.01, Side::below) / mev;
        const double bw = (r.position() - onelevel::omega_from_gamma(0.01) * r.width()) / mev;
        const bool pass = std::abs(e - t.gamma_energy_mev) <= 0.05;
        ok = ok && pass;
        detail("%s: T(E)/T(eps1) = 0.01 at %.4f meV (target %.2f, off %+.4f) %s; Lorentzian estimate eps1 - omega Gamma1 = %.4f",
               t.name, e, t.gamma_energy_mev, e - t.gamma_energy_mev, pass ? "ok" : "out of tolerance", bw);
    }
    report(2, ok, "gamma = 0.01 incidence energies within 0.05 meV");
}

void collapse() {
    cli::RunSpec spec;
    spec.command = cli::Command::collapse;
    spec.gamma = 0.01;
    spec.taumin = 0.5;
    spec.taumax = 15.0;
    spec.points = 1451;
    const auto res = cli::collapse(spec);
    for (const auto& s : res.systems)
        detail("%s: E = %.4f meV, omega = %.4f", s.label.c_str(), s.energy_mev, s.omega);
    for (const auto& w : res.warnings) detail("warning: %s", w.c_str());
    const bool ok = res.warnings.empty() && res.max_pairwise_deviation < 0.02;
    detail("max pairwise deviation (A, B, C, one-level omega = %.5f) = %.4f", onelevel::omega_from_gamma(0.01),
           res.max_pairwise_deviation);
    spec.gamma_model = cli::GammaModel::breit_wigner;
    const auto lorentz = cli::collapse(spec);
    detail("informational: with Lorentzian energies eps1 - omega Gamma1 the deviation is %.4f",
           lorentz.max_pairwise_deviation);
    report(3, ok, "normalized buildups at gamma = 0.01 agree within 0.02 over tau in [0.5, 15]");
}

// least-squares transient constant of (1 - exp(-tau/tau0))^2
double fit_tau0(const std::vector<double>& tau, const std::vector<double>& y) {
    auto cost = [&](double t0) {
        double s = 0.0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double m = std::pow(1.0 - std::exp(-tau[i] / t0), 2);
            s += (y[i] - m) * (y[i] - m);
        }
        return s;
    };
    double a = 0.5, b = 8.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (cost(c) < cost(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return 0.5 * (a + b);
}

void envelope_law() {
    bool ok = true;
    for (const auto& t : kTargets) {
        const auto p = preset(t.name);
        const auto r = first_of(p);
        const BuildupModel model(p, r.position(), std::vector<Resonance>{r});
        const double lifetime = units::lifetime_from_width(r.width());
        std::vector<double> times;
        for (double tau : range(0.5, 15.0, 1451)) times.push_back(tau * lifetime);
        const auto c = time_series(model, well_center(p), times, 1, true);
        double worst = 0.0;
        for (std::size_t i = 0; i < c.values.size(); ++i) {
            const double env = onelevel::envelope(c.abscissa[i]);
            worst = std::max(worst, std::abs(c.values[i] - env) / env);
        }
        const double tau0 = fit_tau0(c.abscissa, c.values);
        const bool pass = worst < 0.02 && std::abs(tau0 - 2.0) <= 0.1;
        ok = ok && pass;
        detail("%s: max relative deviation from (1 - exp(-tau/2))^2 = %.4f, fitted tau0 = %.4f %s", t.name, worst, tau0,
               pass ? "ok" : "out of tolerance");
    }
    report(4, ok, "resonant buildup follows the envelope within 2% and tau0 = 2.0 +/- 0.1");
}

void oracle_equivalence() {
    const auto p = preset("A");
    const double energy = 75.0 * mev, x0 = well_center(p);
    const auto t = range(0.1, 3.0, 291);
    const auto cn = crank_nicolson_reference(p, energy, x0, t);
    const BuildupModel model(p, energy, 1);
    const auto eq = time_series(model, x0, t, 1, false);
    const double peak = *std::max_element(cn.values.begin(), cn.values.end());
    double worst = 0.0, at = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (cn.values[i] < 0.05 * peak) continue;
        ++used;
        const double d = std::abs(eq.values[i] - cn.values[i]) / cn.values[i];
        if (d > worst) worst = d, at = t[i];
    }
    detail("A, E = 75 meV, x0 = %.2f nm: %d samples compared, worst relative difference %.4f at t = %.2f ps", x0, used,
           worst, at);
    report(5, worst < 0.03, "resonance expansion matches the Crank-Nicolson grid solution within 3%");
}

void property_suites() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uni = [&](double a, double b) { return a + (b - a) * u(rng); };
    auto random_profile = [&](double mass) {
        std::vector<Segment> segs(1 + static_cast<std::size_t>(4.0 * u(rng)));
        for (auto& s : segs) s = {uni(0.5, 6.0), uni(-0.1, 0.5)};
        return PotentialProfile(segs, mass);
    };
    bool all = true;
    auto line = [&](const char* what, int cases, double worst, double tol) {
        const bool ok = worst <= tol;
        all = all && ok;
        detail("%-34s %4d cases, worst %.3e (tol %.0e) %s", what, cases, worst, tol, ok ? "ok" : "FAILED");
    };

    double w = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto p = random_profile(uni(0.04, 0.12));
        const auto tm = transfer_matrix(p, units::wavenumber_from_energy(uni(0.002, 0.8), p.mass_ratio()));
        w = std::max(w, std::abs(std::norm(tm.transmission_amplitude()) + std::norm(tm.reflection_amplitude()) - 1.0));
    }
    line("unitarity", 200, w, 1e-10);

    w = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double m = uni(0.04, 0.12);
        const auto p1 = random_profile(m), p2 = random_profile(m);
        auto segs = p1.segments();
        segs.insert(segs.end(), p2.segments().begin(), p2.segments().end());
        const double k = units::wavenumber_from_energy(uni(0.01, 0.6), m);
        const auto direct = transfer_matrix(PotentialProfile(segs, m), k);
        const auto prod = transfer_matrix(p2, k).shifted(p1.length()) * transfer_matrix(p1, k);
        const double s = std::abs(direct.m22());
        w = std::max({w, std::abs(direct.m11() - prod.m11()) / s, std::abs(direct.m12() - prod.m12()) / s,
                      std::abs(direct.m21() - prod.m21()) / s, std::abs(direct.m22() - prod.m22()) / s});
    }
    line("transfer-matrix composition", 200, w, 1e-10);

    w = 0.0;
    for (int n = 0; n < 1000;) {
        const cplx z(uni(-10, 10), uni(-10, 10));
        if (std::abs(z) >= 10.0) continue;
        ++n;
        const cplx a = faddeeva(-z), b = 2.0 * std::exp(-z * z) - faddeeva(z);
        const double s = std::max({std::abs(a), std::abs(faddeeva(z)), 2.0 * std::abs(std::exp(-z * z))});
        w = std::max(w, std::abs(a - b) / s);
    }
    line("Faddeeva reflection symmetry", 1000, w, 1e-11);

    w = 0.0;
    for (int i = 0; i < 500; ++i) {
        const cplx z(uni(-8, 8), uni(0, 6));
        const double h = 1e-5;
        const cplx num = (faddeeva(z + h) - faddeeva(z - h)) / (2.0 * h);
        const cplx ex = -2.0 * z * faddeeva(z) + cplx(0.0, 2.0 / std::sqrt(M_PI));
        w = std::max(w, std::abs(num - ex) / std::abs(ex));
    }
    line("Faddeeva derivative identity", 500, w, 1e-6);

    w = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double x = uni(-30, 30);
        w = std::max(w, std::abs(faddeeva(x).real() - std::exp(-x * x)));
    }
    line("Faddeeva real axis", 500, w, 1e-12);

    w = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double tau = uni(0, 40), om = uni(-20, 20);
        const double d = onelevel::one_level_density(tau, om);
        w = std::max({w, onelevel::envelope(tau) - d, d - onelevel::upper_envelope(tau),
                      std::abs(d - onelevel::one_level_density(tau, -om))});
    }
    line("one-level bounds and omega symmetry", 1000, std::max(w, 0.0), 1e-15);

    w = 0.0;
    int poles = 0;
    bool quadrant = true;
    for (int i = 0; i < 100; ++i) {
        const double h1 = uni(0.2, 0.5), h2 = uni(0.2, 0.5);
        const PotentialProfile p({{uni(2, 6), h1}, {uni(4, 10), 0.0}, {uni(2, 6), h2}}, 0.067);
        for (const auto& r : locate_resonances(p, 0.95 * std::min(h1, h2), 2).resonances) {
            ++poles;
            quadrant = quadrant && r.k_pole.real() > 0.0 && r.k_pole.imag() < 0.0;
            w = std::max(w, std::abs(transfer_matrix(p, -std::conj(r.k_pole)).m22()));
        }
    }
    line("pole quadrant and mirror residual", poles, quadrant ? w : 1.0, 1e-8);

    report(6, all, "randomized property suites");
}

void truncation() {
    bool ok = true;
    for (const auto& t : kTargets) {
        const auto p = preset(t.name);
        const auto rs = first_resonances(p, 3);
        const double energy = rs[0].position() - 0.6 * mev;
        const BuildupModel model(p, energy, rs);
        const auto pt = model.point(well_center(p));
        const double lifetime = units::lifetime_from_width(rs[0].width());
        double late = 0.0, early = 0.0;
        for (double tau : range(0.2, 15.0, 2961)) {
            const double a = std::norm(model.psi(pt, tau * lifetime, 1)), b = std::norm(model.psi(pt, tau * lifetime, 3));
            late = std::max(late, std::abs(a - b) / b);
        }
        for (double tau : range(1e-4, 0.02, 200)) {
            const double a = std::norm(model.psi(pt, tau * lifetime, 1)), b = std::norm(model.psi(pt, tau * lifetime, 3));
            early = std::max(early, std::abs(a - b) / b);
        }
        const bool pass = late < 0.01 && early > 0.05;
        ok = ok && pass;
        detail("%s (E = eps1 - 0.6 meV): max relative difference 1 vs 3 pole pairs %.4f for tau > 0.2, %.2f for tau < 0.02 %s",
               t.name, late, early, pass ? "ok" : "out of tolerance");
    }
    report(7, ok, "single pole pair suffices after 0.2 lifetimes and fails at very short times");
}

}  // namespace

int main() {
    resonance_recovery();
    gamma_energies();
    collapse();
    envelope_law();
    oracle_equivalence();
    property_suites();
    truncation();
    std::printf("%d of 7 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
