#include "resbuild/resonances.hpp"

#include <algorithm>
#include <cmath>

#include "gauss_legendre.hpp"
#include "resbuild/errors.hpp"
#include "resbuild/units.hpp"

namespace resbuild {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double kNewtonStep = 1e-6;  // 1/nm
constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonTol = 1e-12;

double golden_max(const auto& f, double a, double b) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13 * std::abs(b); ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Distance from the peak to the half-maximum point on one side, or a
// negative value if T never drops to half within `limit`.
double half_max_distance(const PotentialProfile& p, double peak_e, double peak_t, double dir, double limit) {
    double lo = 0.0, hi = 1e-7;
    while (true) {
        const double e = peak_e + dir * hi;
        if (hi > limit || e <= 0.0) return -1.0;
        if (transmission(p, e) < 0.5 * peak_t) break;
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (transmission(p, peak_e + dir * mid) < 0.5 * peak_t) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> quadrature_nodes(const PotentialProfile& profile, cplx k, std::vector<double>& weights) {
    static const detail::GaussRule rule = detail::gauss_legendre(20);
    const auto q2 = layer_q2(profile, k);
    std::vector<double> nodes;
    weights.clear();
    for (std::size_t j = 0; j < q2.size(); ++j) {
        const double a = profile.boundary(j), b = profile.boundary(j + 1);
        const double qw = std::sqrt(std::abs(q2[j])) * (b - a);
        const int pieces = std::max(1, static_cast<int>(std::ceil(qw / 3.0)));
        const double h = (b - a) / pieces;
        for (int s = 0; s < pieces; ++s) {
            const double lo = a + s * h;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                nodes.push_back(lo + 0.5 * h * (rule.nodes[i] + 1.0));
                weights.push_back(0.5 * h * rule.weights[i]);
            }
        }
    }
    return nodes;
}

cplx gamow_norm(const PotentialProfile& profile, cplx k, cplx u0) {
    std::vector<double> w;
    const auto nodes = quadrature_nodes(profile, k, w);
    const auto states = propagate_state(profile, k, {u0, -I * k * u0}, nodes);
    cplx integral = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) integral += w[i] * states[i][0] * states[i][0];
    const double edge[1] = {profile.length()};
    const cplx uL = propagate_state(profile, k, {u0, -I * k * u0}, edge)[0][0];
    return integral + I * (u0 * u0 + uL * uL) / (2.0 * k);
}

}  // namespace

NewtonResult refine_pole(const PotentialProfile& profile, cplx k_start) {
    auto f = [&](cplx k) { return transfer_matrix(profile, k).m22(); };
    NewtonResult r{k_start, 0, std::abs(f(k_start)), false};
    cplx k = k_start;
    for (int it = 1; it <= kNewtonMaxIter; ++it) {
        const cplx fk = f(k);
        r.residual = std::abs(fk);
        if (r.residual < kNewtonTol) {
            r.k = k;
            r.iterations = it - 1;
            r.converged = true;
            return r;
        }
        const cplx df = (f(k + kNewtonStep) - f(k - kNewtonStep)) / (2.0 * kNewtonStep);
        if (df == cplx(0.0)) break;
        const cplx step = fk / df;
        k -= step;
        r.iterations = it;
        if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) {
            r.k = k;
            r.converged = false;
            return r;
        }
        // Roundoff floor: m22 is a difference of terms of size ~|m11|, so
        // an exact zero is not representable when the barriers are opaque.
        if (std::abs(step) < 1e-15 * std::abs(k)) {
            const cplx fn = f(k);
            r.residual = std::abs(fn);
            double growth = 0.0;  // log of the largest intermediate term
            const auto q2 = layer_q2(profile, k);
            for (std::size_t j = 0; j < q2.size(); ++j)
                growth += std::abs(std::sqrt(q2[j]).imag()) * profile.segments()[j].width_nm;
            const double floor = 1e-15 * std::max(std::abs(transfer_matrix(profile, k).m11()), std::exp(growth));
            r.converged = r.residual < std::max(kNewtonTol, 64.0 * floor);
            r.k = k;
            return r;
        }
    }
    r.k = k;
    r.residual = std::abs(f(k));
    r.converged = r.residual < kNewtonTol;
    return r;
}

Resonance resonant_state(const PotentialProfile& profile, cplx k_pole, std::span<const double> grid) {
    if (!(k_pole.real() > 0.0 && k_pole.imag() < 0.0))
        throw NumericalError("resonant_state: pole must lie in the fourth quadrant");
    const double len = profile.length();
    const double edge[1] = {len};
    const auto at_L = propagate_state(profile, k_pole, {1.0, -I * k_pole}, edge)[0];
    const double bc_residual = std::abs(at_L[1] - I * k_pole * at_L[0]) / (std::abs(k_pole) * std::abs(at_L[0]));
    if (!(bc_residual < 1e-8))
        throw NumericalError("resonant_state: outgoing condition at x = L violated (residual " +
                             std::to_string(bc_residual) + ")");

    const cplx norm = gamow_norm(profile, k_pole, 1.0);
    const cplx u0 = 1.0 / std::sqrt(norm);

    Resonance r;
    r.k_pole = k_pole;
    r.energy = units::energy_from_wavenumber(k_pole, profile.mass_ratio());
    r.u_at_0 = u0;
    r.u_at_L = at_L[0] * u0;
    r.x.assign(grid.begin(), grid.end());
    const auto states = propagate_state(profile, k_pole, {u0, -I * k_pole * u0}, grid);
    r.u_samples.reserve(states.size());
    for (const auto& s : states) r.u_samples.push_back(s[0]);
    const auto split = partial_widths(r);
    r.gamma0 = split.gamma0;
    r.gammaL = split.gammaL;
    return r;
}

cplx resonant_state_value(const PotentialProfile& profile, const Resonance& res, double x) {
    const double g[1] = {x};
    return propagate_state(profile, res.k_pole, {res.u_at_0, -I * res.k_pole * res.u_at_0}, g)[0][0];
}

double normalization_residual(const PotentialProfile& profile, const Resonance& res) {
    return std::abs(gamow_norm(profile, res.k_pole, res.u_at_0) - 1.0);
}

WidthSplit partial_widths(const Resonance& res) {
    const double a = std::norm(res.u_at_0), b = std::norm(res.u_at_L);
    const double g = res.width();
    return {g * a / (a + b), g * b / (a + b)};
}

BreitWignerFit fit_breit_wigner(const PotentialProfile& profile, double position, double width) {
    constexpr int n = 61;
    std::vector<double> e(n), t(n);
    const double lo = std::max(position - 3.0 * width, 0.05 * position);
    const double hi = position + 3.0 * width;
    for (int i = 0; i < n; ++i) {
        e[i] = lo + (hi - lo) * i / (n - 1);
        t[i] = transmission(profile, e[i]);
    }
    // Levenberg-Marquardt on relative residuals, parameters (eps, Gamma, P)
    double p[3] = {position, width, 0.0};
    {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            const double l = 1.0 / ((e[i] - p[0]) * (e[i] - p[0]) + 0.25 * p[1] * p[1]);
            num += t[i] * l;
            den += l * l;
        }
        p[2] = num / den;
    }
    auto model = [&](const double* q, double x) { return q[2] / ((x - q[0]) * (x - q[0]) + 0.25 * q[1] * q[1]); };
    auto cost = [&](const double* q) {
        double c = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = (model(q, e[i]) - t[i]) / t[i];
            c += r * r;
        }
        return c;
    };
    double lambda = 1e-3;
    double c0 = cost(p);
    for (int it = 0; it < 100; ++it) {
        double jtj[3][3] = {}, jtr[3] = {};
        for (int i = 0; i < n; ++i) {
            const double d = e[i] - p[0];
            const double den = d * d + 0.25 * p[1] * p[1];
            const double m = p[2] / den;
            const double g[3] = {m * 2.0 * d / den / t[i], -m * 0.5 * p[1] / den / t[i], 1.0 / den / t[i]};
            const double r = (m - t[i]) / t[i];
            for (int a = 0; a < 3; ++a) {
                jtr[a] += g[a] * r;
                for (int b = 0; b < 3; ++b) jtj[a][b] += g[a] * g[b];
            }
        }
        double a[3][4];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) a[r][c] = jtj[r][c] * (r == c ? 1.0 + lambda : 1.0);
            a[r][3] = -jtr[r];
        }
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            std::swap(a[col], a[piv]);
            for (int r = col + 1; r < 3; ++r) {
                const double f = a[r][col] / a[col][col];
                for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            }
        }
        double step[3];
        for (int r = 2; r >= 0; --r) {
            double s = a[r][3];
            for (int c = r + 1; c < 3; ++c) s -= a[r][c] * step[c];
            step[r] = s / a[r][r];
        }
        const double trial[3] = {p[0] + step[0], p[1] + step[1], p[2] + step[2]};
        const double c1 = cost(trial);
        if (c1 < c0) {
            const double rel = (c0 - c1) / std::max(c0, 1e-300);
            std::copy(trial, trial + 3, p);
            c0 = c1;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-14) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    return {p[0], std::abs(p[1]), p[2]};
}

ResonanceSearch locate_resonances(const PotentialProfile& profile, double e_max, std::size_t max_count) {
    if (!(e_max > 0.0)) throw DomainError("locate_resonances: e_max must be positive");
    ResonanceSearch out;
    if (max_count == 0) return out;

    const int n = 40000;
    const double e_min = e_max / n;
    std::vector<double> e(n), t(n);
    for (int i = 0; i < n; ++i) {
        e[i] = e_min + (e_max - e_min) * i / (n - 1);
        t[i] = transmission(profile, e[i]);
    }

    const double mass = profile.mass_ratio();
    std::vector<double> grid(401);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = profile.length() * i / (grid.size() - 1);

    for (int i = 1; i + 1 < n && out.resonances.size() < max_count; ++i) {
        if (!(t[i] > t[i - 1] && t[i] >= t[i + 1])) continue;
        auto tf = [&](double x) { return transmission(profile, x); };
        const double peak_e = golden_max(tf, e[i - 1], e[i + 1]);
        const double peak_t = transmission(profile, peak_e);
        const double limit = 0.5 * peak_e;
        const double lo = half_max_distance(profile, peak_e, peak_t, -1.0, limit);
        const double hi = half_max_distance(profile, peak_e, peak_t, +1.0, limit);
        double width_est;
        if (lo > 0.0 && hi > 0.0) {
            width_est = lo + hi;
        } else if (lo > 0.0 || hi > 0.0) {
            width_est = 2.0 * std::max(lo, hi);
        } else {
            width_est = 0.1 * peak_e;
        }

        const cplx k0 = units::wavenumber_from_energy(cplx(peak_e, -0.5 * width_est), mass);
        const auto nr = refine_pole(profile, k0);
        if (!nr.converged) {
            out.failures.push_back({peak_e, "Newton iteration did not converge"});
            continue;
        }
        if (!(nr.k.real() > 0.0 && nr.k.imag() < 0.0)) {
            out.failures.push_back({peak_e, "pole left the fourth quadrant"});
            continue;
        }
        const bool dup = std::any_of(out.resonances.begin(), out.resonances.end(),
                                     [&](const Resonance& r) { return std::abs(r.k_pole - nr.k) < 1e-8; });
        if (dup) continue;
        try {
            Resonance res = resonant_state(profile, nr.k, grid);
            if (res.position() > e_max) continue;
            const auto fit = fit_breit_wigner(profile, res.position(), res.width());
            res.fitted_width_product = fit.width_product;
            const double prod = res.gamma0 * res.gammaL;
            res.fit_warning = std::abs(fit.width_product - prod) > 0.05 * prod;
            out.resonances.push_back(std::move(res));
        } catch (const NumericalError& err) {
            out.failures.push_back({peak_e, err.what()});
        }
    }
    std::sort(out.resonances.begin(), out.resonances.end(),
              [](const Resonance& a, const Resonance& b) { return a.position() < b.position(); });
    return out;
}

std::vector<cplx> locate_poles(const PotentialProfile& profile, double k_max) {
    std::vector<cplx> poles;
    auto add = [&](cplx k) {
        if (!(k.real() > 0.0 && k.imag() < 0.0) || k.real() > k_max) return;
        for (const auto& p : poles)
            if (std::abs(p - k) < 1e-8 * std::max(1.0, std::abs(k))) return;
        poles.push_back(k);
    };
    // narrow resonances from the transmission scan
    const double e_top = std::min(units::energy_from_wavenumber(k_max, profile.mass_ratio()).real(),
                                  std::max(profile.max_height(), 0.01));
    for (const auto& r : locate_resonances(profile, e_top, 1000).resonances) add(r.k_pole);
    // broad poles from a seed lattice in the fourth quadrant
    for (double kr = 0.01; kr < k_max; kr += 0.02) {
        for (double ki = -0.004; ki > -0.8; ki *= 1.6) {
            const auto nr = refine_pole(profile, cplx(kr, ki));
            if (nr.converged) add(nr.k);
        }
    }
    std::sort(poles.begin(), poles.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return poles;
}

std::vector<Resonance> first_resonances(const PotentialProfile& profile, std::size_t count) {
    std::vector<double> grid(401);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = profile.length() * i / (grid.size() - 1);

    double k_max = 1.2 * units::wavenumber_from_energy(std::max(profile.max_height(), 0.01), profile.mass_ratio());
    for (int attempt = 0; attempt < 6; ++attempt, k_max *= 1.6) {
        const auto poles = locate_poles(profile, k_max);
        // keep a margin so that no pole below the last one kept is missed
        if (poles.size() < count + 1) continue;
        std::vector<Resonance> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back(resonant_state(profile, poles[i], grid));
        return out;
    }
    throw NumericalError("first_resonances: could not locate " + std::to_string(count) + " poles");
}

double solve_energy_for_gamma(const PotentialProfile& profile, const Resonance& res, double gamma, Side side) {
    return solve_energy_for_gamma(profile, res.position(), res.width(), gamma, side);
}

}  // namespace resbuild
