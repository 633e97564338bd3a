#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resbuild/potential.hpp"
#include "resbuild/scattering.hpp"

namespace resbuild {

/// Gamow resonance: pole k_n of the S matrix (fourth quadrant), complex
/// energy E_n = eps_n - i Gamma_n / 2 and the normalized outgoing state u_n.
///
/// Normalization: int_0^L u_n^2 dx + i [u_n(0)^2 + u_n(L)^2] / (2 k_n) = 1
/// (squares, not moduli). Phase: u_n(0) is the principal square root of the
/// inverse normalization integral of the state with u(0) = 1.
struct Resonance {
    cplx k_pole;
    cplx energy;
    std::vector<double> x;
    std::vector<cplx> u_samples;
    cplx u_at_0;
    cplx u_at_L;
    double gamma0 = 0.0;
    double gammaL = 0.0;
    /// Breit-Wigner fit of T(E) disagrees with gamma0 * gammaL by more than 5%.
    bool fit_warning = false;
    /// Product gamma0 * gammaL from the Breit-Wigner fit (eV^2), if performed.
    double fitted_width_product = 0.0;

    double position() const { return energy.real(); }
    double width() const { return -2.0 * energy.imag(); }
};

struct ResonanceFailure {
    double seed_energy;
    std::string reason;
};

struct ResonanceSearch {
    std::vector<Resonance> resonances;
    std::vector<ResonanceFailure> failures;
};

struct NewtonResult {
    cplx k;
    int iterations;
    double residual;
    bool converged;
};

/// Newton iteration for m22(k) = 0 with a central-difference derivative
/// (step 1e-6 1/nm); stops at |m22| < 1e-12 or after 50 steps.
NewtonResult refine_pole(const PotentialProfile& profile, cplx k_start);

/// Find up to max_count resonances with eps_n < e_max (eV), ordered by
/// energy. Seeds come from local maxima of T(E) on a dense real grid, widths
/// from the half-maximum points; each seed is then refined in complex k.
/// Seeds whose refinement fails are reported and skipped.
ResonanceSearch locate_resonances(const PotentialProfile& profile, double e_max, std::size_t max_count);

/// All fourth-quadrant poles with Re k < k_max, sorted by Re k. Combines the
/// transmission-scan seeds with a lattice of complex seeds, so broad
/// above-barrier poles that leave no peak in T(E) are found as well.
std::vector<cplx> locate_poles(const PotentialProfile& profile, double k_max);

/// The `count` poles with smallest Re k, with normalized states. Throws
/// NumericalError if they cannot be found.
std::vector<Resonance> first_resonances(const PotentialProfile& profile, std::size_t count);

/// Normalized Gamow state for a converged pole, sampled on grid (sorted, in
/// [0, L]). Throws NumericalError if the outgoing condition at L is violated
/// by more than 1e-8.
Resonance resonant_state(const PotentialProfile& profile, cplx k_pole, std::span<const double> grid);

/// u_n(x) of a normalized resonance at an arbitrary x in [0, L].
cplx resonant_state_value(const PotentialProfile& profile, const Resonance& res, double x);

struct WidthSplit {
    double gamma0;
    double gammaL;
};

/// Split Gamma_n between left and right channels in the ratio
/// |u_n(0)|^2 : |u_n(L)|^2.
WidthSplit partial_widths(const Resonance& res);

/// Fit T(E) = P / ((E - eps)^2 + Gamma^2 / 4) to the computed transmission
/// for |E - eps| <= 3 Gamma, returning the fitted (eps, Gamma, P).
struct BreitWignerFit {
    double position;
    double width;
    double width_product;
};
BreitWignerFit fit_breit_wigner(const PotentialProfile& profile, double position, double width);

/// Residual of the Gamow normalization integral (should be ~0).
double normalization_residual(const PotentialProfile& profile, const Resonance& res);

/// Energy for a target gamma next to the given resonance.
double solve_energy_for_gamma(const PotentialProfile& profile, const Resonance& res, double gamma, Side side);

}  // namespace resbuild
