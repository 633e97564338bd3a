#pragma once

#include <complex>

// Unit system used throughout: energy eV, length nm, time ps, mass as a
// ratio to the free electron mass.
namespace resbuild::units {

using cplx = std::complex<double>;

struct PhysicalConstants {
    /// Reduced Planck constant in eV*ps (CODATA 2018).
    static constexpr double hbar = 6.582119569e-4;
    /// hbar^2 / (2 m_e) in eV*nm^2, from hbar*c = 197.3269804 eV*nm and
    /// m_e*c^2 = 510998.95 eV.
    static constexpr double hbar2_over_2me = 197.3269804 * 197.3269804 / (2.0 * 510998.95);
    static constexpr double electron_mass_ratio_reference = 1.0;
};

/// Wavenumber (1/nm) of a free particle with energy E (eV), possibly complex.
/// The branch has Re k >= 0; for Re k == 0 the branch with Im k >= 0 is used
/// (bound-state side). Complex energies below the real axis therefore map to
/// the fourth quadrant.
cplx wavenumber_from_energy(cplx energy, double mass_ratio);
double wavenumber_from_energy(double energy, double mass_ratio);

/// Inverse of wavenumber_from_energy: E = hbar^2 k^2 / 2m.
cplx energy_from_wavenumber(cplx k, double mass_ratio);

/// 2m/hbar^2 in 1/(eV*nm^2) for the given mass ratio.
double two_m_over_hbar2(double mass_ratio);

/// hbar/m in nm^2/ps.
double hbar_over_mass(double mass_ratio);

/// Lifetime hbar/Gamma in ps for a width given in eV.
double lifetime_from_width(double width_ev);

inline constexpr double mev = 1e-3;

}  // namespace resbuild::units
