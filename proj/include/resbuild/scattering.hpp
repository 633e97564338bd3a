#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "resbuild/potential.hpp"

namespace resbuild {

using cplx = std::complex<double>;

/// 2x2 matrix stored as mantissa * exp(log_scale) so that products through
/// wide evanescent layers never overflow.
struct ScaledMatrix {
    cplx a11{1.0}, a12{0.0}, a21{0.0}, a22{1.0};
    double log_scale = 0.0;

    ScaledMatrix operator*(const ScaledMatrix& rhs) const;
    void normalize();
    std::array<cplx, 2> apply(const std::array<cplx, 2>& v) const;
};

/// Transfer matrix in the external plane-wave basis: with
/// psi = A e^{ikx} + B e^{-ikx} left of the structure and C e^{ikx} + D e^{-ikx}
/// right of it (absolute x), (C, D) = M (A, B). Then t = 1/m22, r = -m21/m22,
/// and S-matrix poles are the zeros of m22.
class TransferMatrix {
public:
    TransferMatrix() = default;
    TransferMatrix(ScaledMatrix m, cplx k) : m_(m), k_(k) {}

    cplx k() const { return k_; }
    double log_scale() const { return m_.log_scale; }
    const ScaledMatrix& scaled() const { return m_; }

    cplx m11() const;
    cplx m12() const;
    cplx m21() const;
    cplx m22() const;
    cplx det() const;

    /// m22 without the exp(log_scale) factor; has the same zeros as m22.
    cplx m22_mantissa() const { return m_.a22; }

    cplx transmission_amplitude() const;
    cplx reflection_amplitude() const;

    /// Matrix of the same structure translated by dx along x.
    TransferMatrix shifted(double dx) const;

    TransferMatrix operator*(const TransferMatrix& rhs) const;

private:
    ScaledMatrix m_;
    cplx k_{1.0};
};

/// Propagator of (psi, psi') across a constant layer; depends on q^2 only, so
/// it is analytic in k and free of branch choices.
ScaledMatrix layer_propagator(cplx q2, double width);

/// q_j^2 = k^2 - 2 m V_j / hbar^2 for every segment.
std::vector<cplx> layer_q2(const PotentialProfile& profile, cplx k);

/// Propagator of (psi, psi') from x = 0 to x = L.
ScaledMatrix structure_propagator(const PotentialProfile& profile, cplx k);

/// Values (psi(x), psi'(x)) on a sorted grid in [0, L], starting from
/// (psi, psi') at x = 0.
std::vector<std::array<cplx, 2>> propagate_state(const PotentialProfile& profile, cplx k,
                                                 std::array<cplx, 2> state_at_zero,
                                                 std::span<const double> grid);

TransferMatrix transfer_matrix(const PotentialProfile& profile, cplx k);

/// Transmission probability |t|^2 for real energy E > 0 (eV).
double transmission(const PotentialProfile& profile, double energy);

struct ScatteringSolution {
    cplx k;
    cplx t_amp;
    cplx r_amp;
    std::vector<double> x;
    std::vector<cplx> phi;
    std::vector<cplx> dphi;
};

/// Stationary solution for a unit wave e^{ikx} incident from the left.
ScatteringSolution stationary_wavefunction(const PotentialProfile& profile, double energy,
                                           std::span<const double> grid);

/// Single-point convenience wrapper.
cplx stationary_value(const PotentialProfile& profile, double energy, double x);

enum class Side { below, above };

/// Energy on one flank of an isolated resonance (eps, width in eV) where
/// T(E) = gamma * T(eps). Bisection inside (eps - 10 width, eps) or
/// (eps, eps + 10 width), to 1e-4 meV.
double solve_energy_for_gamma(const PotentialProfile& profile, double resonance_energy, double width,
                              double gamma, Side side);

}  // namespace resbuild
