#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "resbuild/potential.hpp"
#include "resbuild/resonances.hpp"

namespace resbuild {

/// Sampled buildup |Psi|^2 (or |Psi/phi|^2) against time.
struct BuildupCurve {
    std::vector<double> abscissa;  // t in ps, or tau in lifetimes when normalized
    std::vector<double> values;
    std::string label;
    double energy = 0.0;  // eV
    double x0 = 0.0;      // nm
    int pole_count = 0;   // number of pole pairs; 0 for the grid oracle
    bool normalized = false;
};

/// Internal-region solution for a cutoff plane wave released at t = 0:
///
///   Psi(x,t) = phi(x) M(0,k;t) - phi*(x) M(0,-k;t) - i sum_n phi_n M(0,k_n;t)
///
/// with phi_n = 2k u_n(0) u_n(x) / (k^2 - k_n^2). The sum runs over the
/// first `pole_pairs` fourth-quadrant poles and their mirrors
/// k_{-n} = -conj(k_n), u_{-n} = conj(u_n).
///
/// Resonances are located once at construction and reused for every (x, t).
class BuildupModel {
public:
    /// Locates the first `max_pole_pairs` resonances of the profile.
    BuildupModel(PotentialProfile profile, double energy, int max_pole_pairs = 1);
    BuildupModel(PotentialProfile profile, double energy, std::vector<Resonance> resonances);

    const PotentialProfile& profile() const { return profile_; }
    double energy() const { return energy_; }
    double k() const { return k_; }
    const std::vector<Resonance>& resonances() const { return resonances_; }
    int max_pole_pairs() const { return static_cast<int>(resonances_.size()); }

    cplx stationary(double x) const;

    /// Psi(x, t) with the first `pole_pairs` pole pairs.
    cplx psi(double x, double t_ps, int pole_pairs) const;

    /// Same, with phi(x) and u_n(x) already evaluated (hot loops over t).
    struct PointData {
        double x;
        cplx phi;
        std::vector<cplx> pole_coeff;  // phi_n for n = 1..N
    };
    PointData point(double x) const;
    cplx psi(const PointData& p, double t_ps, int pole_pairs) const;

private:
    PotentialProfile profile_;
    double energy_;
    double k_;
    std::vector<Resonance> resonances_;
};

/// Single-call form of BuildupModel::psi.
cplx internal_wavefunction(const PotentialProfile& profile, double energy, double x, double t_ps, int pole_pairs);

/// Time series at x0. If `normalize`, values are |Psi/phi(x0)|^2 and the
/// abscissa is tau = t Gamma_1 / hbar; t_grid is still given in ps.
BuildupCurve time_series(const BuildupModel& model, double x0, std::span<const double> t_grid, int pole_pairs,
                         bool normalize = false);

struct Snapshot {
    std::vector<double> x;
    std::vector<double> stationary;             // |phi|^2
    std::vector<double> times;                  // ps
    std::vector<std::vector<double>> density;   // [time][x] |Psi|^2
};

Snapshot snapshot(const BuildupModel& model, std::span<const double> times, std::span<const double> x_grid,
                  int pole_pairs);

/// Settings of the Crank-Nicolson grid oracle.
struct GridOracleSettings {
    double dx = 0.01;                // nm
    double dt = 1e-4;                // ps
    double left_extent = 0.0;        // nm of free space left of x = 0; 0 selects automatically
    double right_extent = 0.0;       // nm right of x = L; 0 selects automatically
    double absorber_width = 0.0;     // nm; 0 selects automatically
    double taper_width = 0.0;        // nm over which the initial wave is switched on at the far left
};

/// Direct integration of the time-dependent Schrodinger equation from the
/// cutoff plane wave e^{ikx} - e^{-ikx} (x <= 0), 0 (x > 0), on a finite
/// grid closed by complex absorbing potentials. Samples |Psi(x0, t)|^2 at
/// t_grid (ps, increasing). Throws NumericalError if the grid is too
/// coarse, the domain too short for t_max, or the estimated absorber
/// reflection exceeds 1%.
BuildupCurve crank_nicolson_reference(const PotentialProfile& profile, double energy, double x0,
                                      std::span<const double> t_grid, GridOracleSettings settings = {});

}  // namespace resbuild
