#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "resbuild/dynamics.hpp"
#include "resbuild/errors.hpp"
#include "resbuild/onelevel.hpp"
#include "resbuild/resonances.hpp"
#include "resbuild/specialfn.hpp"
#include "resbuild/units.hpp"

using namespace resbuild;
using units::mev;

namespace {

const std::vector<Resonance>& poles(const char* name, std::size_t count) {
    static std::map<std::pair<std::string, std::size_t>, std::vector<Resonance>> cache;
    const auto key = std::make_pair(std::string(name), count);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, first_resonances(preset(name), count)).first;
    return it->second;
}

std::vector<double> range(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("long-time limit is the stationary state") {
    const auto p = preset("A");
    const BuildupModel model(p, 0.075, poles("A", 1));
    const double x0 = well_center(p);
    const double lifetime = units::lifetime_from_width(model.resonances()[0].width());
    const double t[] = {20.0 * lifetime};
    const auto curve = time_series(model, x0, t, 1, true);
    CHECK(std::abs(curve.values[0] - 1.0) < 0.02);
    CHECK(curve.abscissa[0] == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(curve.normalized);
}

TEST_CASE("the structure starts empty") {
    const auto p = preset("A");
    const BuildupModel model(p, 0.075, poles("A", 6));
    double worst = 0.0;
    for (double x : range(0.25, p.length() - 0.25, 59)) worst = std::max(worst, std::norm(model.psi(x, 0.0, 1)));
    CHECK(worst < 1e-4);
}

TEST_CASE("initial residue at the centre shrinks with more poles") {
    const auto p = preset("A");
    const BuildupModel model(p, 0.075, poles("A", 6));
    const double x0 = well_center(p);
    CHECK(std::norm(model.psi(x0, 0.0, 1)) < 1e-3);
    CHECK(std::norm(model.psi(x0, 0.0, 6)) < 1e-4);
    CHECK(std::norm(model.psi(x0, 0.0, 6)) < 0.1 * std::norm(model.psi(x0, 0.0, 1)));
}

TEST_CASE("snapshots overshoot and undershoot the stationary density") {
    const auto p = preset("A");
    const BuildupModel model(p, 0.075, poles("A", 1));
    const auto xs = range(0.0, p.length(), 151);
    const double times[] = {0.04, 0.4, 0.8, 1.2};
    const auto snap = snapshot(model, times, xs, 1);
    REQUIRE(snap.density.size() == 4);
    bool above = false, below = false, both_at_once = false;
    for (const auto& d : snap.density) {
        bool a = false, b = false;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            a = a || d[j] > snap.stationary[j] * 1.001;
            b = b || d[j] < snap.stationary[j] * 0.999;
        }
        above = above || a;
        below = below || b;
        both_at_once = both_at_once || (a && b);
    }
    CHECK(above);
    CHECK(below);

    const double late[] = {30.0 * units::lifetime_from_width(model.resonances()[0].width())};
    const auto end = snapshot(model, late, xs, 1);
    for (std::size_t j = 0; j < xs.size(); ++j)
        CHECK(end.density[0][j] == doctest::Approx(end.stationary[j]).epsilon(0.01));
}

TEST_CASE("oscillation period follows the detuning") {
    const auto p = preset("A");
    const auto& rs = poles("A", 1);
    const double detune = 0.6 * mev;
    const BuildupModel model(p, rs[0].position() - detune, rs);
    const double lifetime = units::lifetime_from_width(rs[0].width());
    std::vector<double> t;
    for (double tau : range(1.0, 30.0, 5801)) t.push_back(tau * lifetime);
    const auto c = time_series(model, well_center(p), t, 1, true);
    // the slow beat carries a small fast ripple, so take the maximum over a
    // window around each expected crest
    const double omega = detune / rs[0].width();
    const double period = 2.0 * M_PI / omega;
    auto crest = [&](double lo, double hi) {
        double best = -1.0, at = 0.0;
        for (std::size_t i = 0; i < c.values.size(); ++i)
            if (c.abscissa[i] >= lo && c.abscissa[i] <= hi && c.values[i] > best) best = c.values[i], at = c.abscissa[i];
        return at;
    };
    const double first = crest(0.25 * period, 0.75 * period);
    const double second = crest(1.25 * period, 1.75 * period);
    CHECK(second - first == doctest::Approx(period).epsilon(0.03));
}

TEST_CASE("resonant incidence builds up like a charging capacitor") {
    for (const char* name : {"A", "B", "C"}) {
        const auto p = preset(name);
        const auto& rs = poles(name, 1);
        const BuildupModel model(p, rs[0].position(), rs);
        const double lifetime = units::lifetime_from_width(rs[0].width());
        std::vector<double> t;
        for (double tau : range(0.5, 15.0, 291)) t.push_back(tau * lifetime);
        const auto c = time_series(model, well_center(p), t, 1, true);
        double worst = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double env = onelevel::envelope(c.abscissa[i]);
            worst = std::max(worst, std::abs(c.values[i] - env) / env);
        }
        const std::string sys = name;
        CAPTURE(sys);
        CHECK(worst < 0.02);

        // 1 - |Psi/phi|^2 decays like exp(-tau/2)
        std::vector<double> fit_x, fit_y;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (c.abscissa[i] > 6.0) {
                fit_x.push_back(c.abscissa[i]);
                fit_y.push_back(std::log(std::abs(1.0 - c.values[i])));
            }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < fit_x.size(); ++i) mx += fit_x[i], my += fit_y[i];
        mx /= fit_x.size();
        my /= fit_x.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < fit_x.size(); ++i) {
            sxy += (fit_x[i] - mx) * (fit_y[i] - my);
            sxx += (fit_x[i] - mx) * (fit_x[i] - mx);
        }
        CHECK(sxy / sxx == doctest::Approx(-0.5).epsilon(0.1));
    }
}

TEST_CASE("second pole of a symmetric well does not reach the centre") {
    const auto p = preset("B");
    const BuildupModel model(p, 0.037, poles("B", 2));
    const auto pt = model.point(well_center(p));
    CHECK(std::abs(pt.pole_coeff[1]) < 1e-8 * std::abs(pt.pole_coeff[0]));
}

TEST_CASE("single-call form and argument checks") {
    const auto p = preset("C");
    const BuildupModel model(p, 0.05, poles("C", 1));
    CHECK(std::abs(internal_wavefunction(p, 0.05, 3.0, 0.7, 1) - model.psi(3.0, 0.7, 1)) < 1e-12);
    CHECK_THROWS_AS(model.point(-0.1), DomainError);
    CHECK_THROWS_AS(model.point(p.length() + 0.1), DomainError);
    CHECK_THROWS_AS(model.psi(3.0, -1.0, 1), DomainError);
    CHECK_THROWS_AS(model.psi(3.0, 1.0, 2), DomainError);
    CHECK_THROWS_AS(BuildupModel(p, 0.0, poles("C", 1)), DomainError);
    const double bad[] = {0.2, 0.1};
    CHECK_THROWS_AS(time_series(model, 3.0, bad, 1), DomainError);

    // incidence exactly on a (fabricated) real pole is degenerate
    auto fake = poles("C", 1);
    fake[0].k_pole = units::wavenumber_from_energy(0.05, p.mass_ratio());
    CHECK_THROWS_AS(BuildupModel(p, 0.05, fake), DomainError);
}

TEST_CASE("grid oracle reproduces the free shutter solution") {
    const PotentialProfile free_space({{2.0, 0.0}}, 0.067, "free");
    const double e = 0.075, x0 = 1.0;
    const double k = units::wavenumber_from_energy(e, 0.067);
    const double t[] = {0.002, 0.005, 0.01, 0.02, 0.04};
    const auto cn = crank_nicolson_reference(free_space, e, x0, t);
    for (std::size_t i = 0; i < std::size(t); ++i) {
        const double exact = std::norm(moshinsky_at(x0, k, t[i], 0.067) - moshinsky_at(x0, -k, t[i], 0.067));
        CAPTURE(t[i]);
        CHECK(cn.values[i] == doctest::Approx(exact).epsilon(0.01));
    }
}

TEST_CASE("grid oracle converges in the time step") {
    const auto p = preset("A");
    const double t[] = {0.1, 0.2, 0.3};
    GridOracleSettings fine;
    fine.dt = 5e-5;
    const auto a = crank_nicolson_reference(p, 0.075, well_center(p), t);
    const auto b = crank_nicolson_reference(p, 0.075, well_center(p), t, fine);
    for (std::size_t i = 0; i < std::size(t); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 0.003 * b.values[i]);
}

TEST_CASE("grid oracle rejects unresolved settings") {
    const auto p = preset("A");
    const double t[] = {0.1};
    GridOracleSettings coarse;
    coarse.dx = 0.02;
    CHECK_THROWS_AS(crank_nicolson_reference(p, 0.075, 7.5, t, coarse), DomainError);
    coarse = {};
    coarse.dt = 2e-4;
    CHECK_THROWS_AS(crank_nicolson_reference(p, 0.075, 7.5, t, coarse), DomainError);
    coarse = {};
    coarse.left_extent = 50.0;
    CHECK_THROWS_AS(crank_nicolson_reference(p, 0.075, 7.5, t, coarse), NumericalError);
}
