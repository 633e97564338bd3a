#pragma once

namespace resbuild::onelevel {

/// Transient time constant of the resonant buildup, in lifetimes.
inline constexpr double kTau0 = 2.0;

/// Detuning of the incidence energy in units of the resonance width. Stored
/// as |omega|: the one-level density is even in omega, so detuning above and
/// below the resonance is equivalent.
class OneLevelParams {
public:
    explicit OneLevelParams(double omega);
    static OneLevelParams from_energies(double resonance_energy, double width, double energy);

    double omega() const { return omega_; }
    double tau0() const { return kTau0; }

private:
    double omega_;
};

/// |Psi(tau)/phi|^2 = 1 + e^{-tau} - 2 e^{-tau/2} cos(omega tau), tau in
/// lifetimes. Reliable from tau ~ 0.5 on; at shorter times other poles
/// contribute to the full solution.
double one_level_density(double tau, double omega);

/// omega = sqrt(1/gamma - 1) / 2 for gamma = T(E)/T(eps) in (0, 1].
double omega_from_gamma(double gamma);

/// Inverse of omega_from_gamma: gamma = 1 / (1 + 4 omega^2).
double gamma_from_omega(double omega);

/// Breit-Wigner transmission Gamma0 GammaL / ((E - eps)^2 + Gamma^2 / 4).
/// Requires Gamma0 + GammaL = Gamma to 1e-9 relative.
double breit_wigner(double energy, double resonance_energy, double width, double width_left, double width_right);

/// Lower envelope (1 - e^{-tau/tau0})^2 with tau0 = 2: the capacitor-like
/// buildup at resonance.
double envelope(double tau);

/// Upper envelope (1 + e^{-tau/2})^2.
double upper_envelope(double tau);

}  // namespace resbuild::onelevel
