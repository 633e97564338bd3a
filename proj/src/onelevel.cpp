#include "resbuild/onelevel.hpp"

#include <cmath>

#include "resbuild/errors.hpp"

namespace resbuild::onelevel {

OneLevelParams::OneLevelParams(double omega) : omega_(std::abs(omega)) {
    if (!std::isfinite(omega)) throw DomainError("OneLevelParams: omega must be finite");
}

OneLevelParams OneLevelParams::from_energies(double resonance_energy, double width, double energy) {
    if (!(width > 0.0)) throw DomainError("OneLevelParams: width must be positive");
    return OneLevelParams((resonance_energy - energy) / width);
}

double one_level_density(double tau, double omega) {
    if (!(tau >= 0.0)) throw DomainError("one_level_density: tau must be non-negative");
    const double h = std::exp(-0.5 * tau);
    return 1.0 + h * h - 2.0 * h * std::cos(omega * tau);
}

double omega_from_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("omega_from_gamma: gamma must lie in (0, 1]");
    return 0.5 * std::sqrt(1.0 / gamma - 1.0);
}

double gamma_from_omega(double omega) { return 1.0 / (1.0 + 4.0 * omega * omega); }

double breit_wigner(double energy, double resonance_energy, double width, double width_left, double width_right) {
    if (!(width > 0.0 && width_left > 0.0 && width_right > 0.0))
        throw DomainError("breit_wigner: widths must be positive");
    if (std::abs(width_left + width_right - width) > 1e-9 * width)
        throw DomainError("breit_wigner: partial widths must add up to the total width");
    const double d = energy - resonance_energy;
    return width_left * width_right / (d * d + 0.25 * width * width);
}

double envelope(double tau) {
    if (!(tau >= 0.0)) throw DomainError("envelope: tau must be non-negative");
    const double g = -std::expm1(-tau / kTau0);
    return g * g;
}

double upper_envelope(double tau) {
    const double g = 1.0 + std::exp(-tau / kTau0);
    return g * g;
}

}  // namespace resbuild::onelevel
