#include "resbuild/units.hpp"

#include <cmath>

#include "resbuild/errors.hpp"

namespace resbuild::units {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_mass(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("mass_ratio must be positive and finite");
}

}  // namespace

double two_m_over_hbar2(double mass_ratio) {
    check_mass(mass_ratio);
    return mass_ratio / PhysicalConstants::hbar2_over_2me;
}

double hbar_over_mass(double mass_ratio) {
    check_mass(mass_ratio);
    // hbar/m = 2 * (hbar^2/2m) / hbar
    return 2.0 * PhysicalConstants::hbar2_over_2me / (mass_ratio * PhysicalConstants::hbar);
}

cplx wavenumber_from_energy(cplx energy, double mass_ratio) {
    if (!finite(energy) || !std::isfinite(mass_ratio)) throw DomainError("wavenumber_from_energy: non-finite input");
    if (mass_ratio <= 0.0) throw DomainError("wavenumber_from_energy: mass_ratio must be positive");
    cplx k = std::sqrt(energy * two_m_over_hbar2(mass_ratio));
    // principal sqrt already gives Re k >= 0; pin the imaginary-axis case
    if (k.real() == 0.0 && k.imag() < 0.0) k = -k;
    return k;
}

double wavenumber_from_energy(double energy, double mass_ratio) {
    if (!std::isfinite(energy)) throw DomainError("wavenumber_from_energy: non-finite energy");
    if (energy < 0.0) throw DomainError("wavenumber_from_energy: negative real energy has no real wavenumber");
    return wavenumber_from_energy(cplx(energy, 0.0), mass_ratio).real();
}

cplx energy_from_wavenumber(cplx k, double mass_ratio) {
    if (mass_ratio <= 0.0) throw DomainError("energy_from_wavenumber: mass_ratio must be positive");
    return k * k / two_m_over_hbar2(mass_ratio);
}

double lifetime_from_width(double width_ev) {
    if (!(width_ev > 0.0)) throw DomainError("lifetime_from_width: width must be positive");
    return PhysicalConstants::hbar / width_ev;
}

}  // namespace resbuild::units
