#include "resbuild/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "resbuild/dynamics.hpp"
#include "resbuild/errors.hpp"
#include "resbuild/onelevel.hpp"
#include "resbuild/resonances.hpp"
#include "resbuild/scattering.hpp"
#include "resbuild/units.hpp"

namespace resbuild::cli {

namespace {

const char* command_name(Command c) {
    switch (c) {
        case Command::transmission: return "transmission";
        case Command::poles: return "poles";
        case Command::evolve: return "evolve";
        case Command::snapshot: return "snapshot";
        case Command::onelevel: return "onelevel";
        case Command::collapse: return "collapse";
        case Command::oracle: return "oracle";
    }
    return "?";
}

bool needs_profile(Command c) { return c != Command::onelevel && c != Command::collapse; }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::string param(const std::string& key, double value) { return "param " + key + " = " + format_number(value); }
std::string param(const std::string& key, const std::string& value) { return "param " + key + " = " + value; }

Csv with_header(const RunSpec& spec, const PotentialProfile* profile) {
    Csv csv;
    csv.meta.push_back(std::string("resbuild ") + kVersion);
    csv.meta.push_back(std::string("command = ") + command_name(spec.command));
    if (profile) {
        csv.meta.push_back("profile = " + profile->label() + " hash=" + profile_hash(*profile));
        csv.meta.push_back("mass_ratio = " + format_number(profile->mass_ratio()));
        for (const auto& s : profile->segments())
            csv.meta.push_back("segment = " + format_number(s.width_nm) + " nm " + format_number(s.height_ev) + " eV");
    }
    csv.meta.push_back(param("pole_pairs", spec.pole_pairs));
    return csv;
}

std::vector<Resonance> resonances_for(const PotentialProfile& profile, int pole_pairs) {
    return first_resonances(profile, static_cast<std::size_t>(std::max(pole_pairs, 1)));
}

// Incidence energy (eV) from --energy-mev, or from --gamma next to the
// first resonance.
double incidence_energy(const RunSpec& spec, const PotentialProfile& profile, const Resonance& res) {
    if (spec.energy_mev) return *spec.energy_mev * units::mev;
    if (spec.gamma) {
        const Side side = spec.below ? Side::below : Side::above;
        if (spec.gamma_model == GammaModel::breit_wigner) {
            const double w = onelevel::omega_from_gamma(*spec.gamma);
            return res.position() + (spec.below ? -w : w) * res.width();
        }
        return solve_energy_for_gamma(profile, res, *spec.gamma, side);
    }
    throw ConfigError("an incidence energy is required (--energy-mev or --gamma)");
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string Csv::str() const {
    std::ostringstream os;
    for (const auto& m : meta) os << "# " << m << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_number(r[i]);
        os << '\n';
    }
    for (const auto& t : trailer) os << "# " << t << '\n';
    return os.str();
}

void RunSpec::validate() const {
    if (needs_profile(command)) {
        if (preset.has_value() == profile_path.has_value())
            throw ConfigError("exactly one of --preset or --profile is required");
    } else if (preset || profile_path) {
        if (command == Command::onelevel) throw ConfigError("onelevel takes no profile");
    }
    if (points && *points < 2) throw ConfigError("--points must be at least 2");
    if (pole_pairs < 1) throw ConfigError("--pole-pairs must be at least 1");
    if (tmax_ps && !(*tmax_ps > 0.0)) throw ConfigError("--tmax-ps must be positive");
    if (taumax && !(*taumax > 0.0)) throw ConfigError("--taumax must be positive");
    if (taumax && !(*taumax > taumin)) throw ConfigError("--taumax must exceed --taumin");
    if (taumin < 0.0) throw ConfigError("--taumin must be non-negative");
    if (command == Command::transmission && !(emax_mev > emin_mev && emin_mev > 0.0))
        throw ConfigError("energy range must satisfy 0 < emin < emax");
    if (gamma && !(*gamma > 0.0 && *gamma <= 1.0)) throw ConfigError("--gamma must lie in (0, 1]");
    if (energy_mev && !(*energy_mev > 0.0)) throw ConfigError("--energy-mev must be positive");
    if (count < 1) throw ConfigError("--count must be at least 1");
    if (command == Command::snapshot && times_ps.empty()) throw ConfigError("--times-ps needs at least one time");
    if (command == Command::collapse && presets.empty()) throw ConfigError("--presets needs at least one system");
}

PotentialProfile resolve_profile(const RunSpec& spec) {
    if (spec.preset) return preset(*spec.preset);
    if (spec.profile_path) return load_profile(*spec.profile_path);
    throw ConfigError("no profile given (--preset or --profile)");
}

Csv cmd_transmission(const RunSpec& spec) {
    const auto profile = resolve_profile(spec);
    const int n = spec.points.value_or(2000);
    Csv csv = with_header(spec, &profile);
    csv.meta.push_back(param("emin_mev", spec.emin_mev));
    csv.meta.push_back(param("emax_mev", spec.emax_mev));
    csv.meta.push_back(param("points", n));
    csv.columns = {"E_meV", "T"};
    for (double e : linspace(spec.emin_mev, spec.emax_mev, n))
        csv.rows.push_back({e, transmission(profile, e * units::mev)});
    return csv;
}

Csv cmd_poles(const RunSpec& spec) {
    const auto profile = resolve_profile(spec);
    const double emax = spec.pole_emax_mev ? *spec.pole_emax_mev * units::mev : profile.max_height();
    Csv csv = with_header(spec, &profile);
    csv.meta.push_back(param("emax_mev", emax / units::mev));
    csv.meta.push_back(param("count", spec.count));
    const auto found = locate_resonances(profile, emax, static_cast<std::size_t>(spec.count));
    csv.columns = {"n",          "eps_meV",     "Gamma_meV", "Re_k_per_nm", "Im_k_per_nm",
                   "Gamma0_meV", "GammaL_meV", "T_peak",    "lifetime_ps", "fit_warning"};
    int idx = 1;
    for (const auto& r : found.resonances) {
        csv.rows.push_back({static_cast<double>(idx++), r.position() / units::mev, r.width() / units::mev,
                            r.k_pole.real(), r.k_pole.imag(), r.gamma0 / units::mev, r.gammaL / units::mev,
                            transmission(profile, r.position()), units::lifetime_from_width(r.width()),
                            r.fit_warning ? 1.0 : 0.0});
    }
    for (const auto& f : found.failures)
        csv.trailer.push_back("warning: seed at " + format_number(f.seed_energy / units::mev) + " meV: " + f.reason);
    if (found.resonances.empty()) throw NumericalError("no resonance found below " + format_number(emax / units::mev) + " meV");
    return csv;
}

Csv cmd_evolve(const RunSpec& spec) {
    const auto profile = resolve_profile(spec);
    const auto rs = resonances_for(profile, spec.pole_pairs);
    const double energy = incidence_energy(spec, profile, rs.front());
    const double x0 = spec.x0_nm.value_or(well_center(profile));
    const int n = spec.points.value_or(1000);
    const BuildupModel model(profile, energy, rs);
    const double lifetime = units::lifetime_from_width(rs.front().width());
    const bool normalized = spec.taumax.has_value();
    const double t_end = normalized ? *spec.taumax * lifetime : spec.tmax_ps.value_or(5.0);

    Csv csv = with_header(spec, &profile);
    csv.meta.push_back(param("energy_mev", energy / units::mev));
    csv.meta.push_back(param("x0_nm", x0));
    csv.meta.push_back(param("points", n));
    csv.meta.push_back(param(normalized ? "taumax" : "tmax_ps", normalized ? *spec.taumax : t_end));
    csv.meta.push_back(param("eps1_mev", rs.front().position() / units::mev));
    csv.meta.push_back(param("Gamma1_mev", rs.front().width() / units::mev));
    const cplx phi = model.stationary(x0);
    csv.meta.push_back(param("stationary_density", std::norm(phi)));

    const auto grid = linspace(0.0, t_end, n);
    const auto curve = time_series(model, x0, grid, spec.pole_pairs, false);
    csv.columns = {"t_ps", "tau", "density", "normalized_density"};
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.rows.push_back({grid[i], grid[i] / lifetime, curve.values[i], curve.values[i] / std::norm(phi)});
    return csv;
}

Csv cmd_snapshot(const RunSpec& spec) {
    const auto profile = resolve_profile(spec);
    const auto rs = resonances_for(profile, spec.pole_pairs);
    const double energy = incidence_energy(spec, profile, rs.front());
    const int n = spec.points.value_or(301);
    const BuildupModel model(profile, energy, rs);
    const auto xs = linspace(0.0, profile.length(), n);
    const auto snap = snapshot(model, spec.times_ps, xs, spec.pole_pairs);

    Csv csv = with_header(spec, &profile);
    csv.meta.push_back(param("energy_mev", energy / units::mev));
    csv.meta.push_back(param("points", n));
    csv.columns = {"x_nm", "stationary"};
    for (double t : spec.times_ps) csv.columns.push_back("t=" + format_number(t) + "ps");
    for (std::size_t j = 0; j < xs.size(); ++j) {
        std::vector<double> row{xs[j], snap.stationary[j]};
        for (const auto& d : snap.density) row.push_back(d[j]);
        csv.rows.push_back(std::move(row));
    }
    return csv;
}

Csv cmd_onelevel(const RunSpec& spec) {
    double omega = 0.0;
    if (spec.omega) {
        omega = std::abs(*spec.omega);
    } else if (spec.gamma) {
        omega = onelevel::omega_from_gamma(*spec.gamma);
    } else {
        throw ConfigError("onelevel needs --gamma or --omega");
    }
    const double taumax = spec.taumax.value_or(15.0);
    const int n = spec.points.value_or(1501);
    Csv csv = with_header(spec, nullptr);
    csv.meta.push_back(param("omega", omega));
    csv.meta.push_back(param("taumax", taumax));
    csv.meta.push_back(param("points", n));
    csv.columns = {"tau", "density", "envelope", "upper_envelope"};
    for (double tau : linspace(0.0, taumax, n))
        csv.rows.push_back({tau, onelevel::one_level_density(tau, omega), onelevel::envelope(tau),
                            onelevel::upper_envelope(tau)});
    return csv;
}

CollapseResult collapse(const RunSpec& spec) {
    if (!spec.gamma) throw ConfigError("collapse needs --gamma");
    const double gamma = *spec.gamma;
    const double omega = onelevel::omega_from_gamma(gamma);
    const double taumax = spec.taumax.value_or(15.0);
    const int n = spec.points.value_or(1451);
    const auto taus = linspace(spec.taumin, taumax, n);

    CollapseResult out;
    out.csv = with_header(spec, nullptr);
    out.csv.meta.push_back(param("gamma", gamma));
    out.csv.meta.push_back(param("omega", omega));
    out.csv.meta.push_back(param("gamma_model", spec.gamma_model == GammaModel::transmission ? "transmission"
                                                                                               : "breit-wigner"));
    out.csv.meta.push_back(param("taumin", spec.taumin));
    out.csv.meta.push_back(param("taumax", taumax));
    out.csv.meta.push_back(param("points", n));

    std::vector<std::vector<double>> curves;
    for (const auto& name : spec.presets) {
        try {
            const auto profile = preset(name);
            const auto rs = resonances_for(profile, spec.pole_pairs);
            const auto& r = rs.front();
            const double energy = incidence_energy(spec, profile, r);
            const BuildupModel model(profile, energy, rs);
            const double x0 = well_center(profile);
            const double lifetime = units::lifetime_from_width(r.width());
            std::vector<double> t(taus.size());
            std::transform(taus.begin(), taus.end(), t.begin(), [&](double tau) { return tau * lifetime; });
            curves.push_back(time_series(model, x0, t, spec.pole_pairs, true).values);
            out.csv.columns.push_back(profile.label());
            out.systems.push_back({profile.label(), energy / units::mev, r.position() / units::mev,
                                   r.width() / units::mev, (r.position() - energy) / r.width()});
            out.csv.meta.push_back("system " + profile.label() + " hash=" + profile_hash(profile) +
                                   " energy_mev=" + format_number(energy / units::mev) +
                                   " eps1_mev=" + format_number(r.position() / units::mev) +
                                   " Gamma1_mev=" + format_number(r.width() / units::mev));
        } catch (const std::exception& e) {
            out.warnings.push_back("system " + name + " skipped: " + e.what());
        }
    }
    if (curves.empty()) {
        std::string msg = "collapse: no system could be evaluated";
        for (const auto& w : out.warnings) msg += "\n  " + w;
        throw NumericalError(msg);
    }

    std::vector<double> one(taus.size()), env(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        one[i] = onelevel::one_level_density(taus[i], omega);
        env[i] = onelevel::envelope(taus[i]);
    }
    curves.push_back(one);

    out.csv.columns.insert(out.csv.columns.begin(), "tau");
    out.csv.columns.push_back("onelevel");
    out.csv.columns.push_back("envelope");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        std::vector<double> row{taus[i]};
        for (const auto& c : curves) row.push_back(c[i]);
        row.push_back(env[i]);
        out.csv.rows.push_back(std::move(row));
        for (std::size_t a = 0; a < curves.size(); ++a)
            for (std::size_t b = a + 1; b < curves.size(); ++b)
                out.max_pairwise_deviation = std::max(out.max_pairwise_deviation, std::abs(curves[a][i] - curves[b][i]));
    }
    for (const auto& w : out.warnings) out.csv.trailer.push_back("warning: " + w);
    for (const auto& s : out.systems)
        out.csv.trailer.push_back("energy " + s.label + " = " + format_number(s.energy_mev) +
                                  " meV (omega = " + format_number(s.omega) + ")");
    out.csv.trailer.push_back("max_pairwise_deviation = " + format_number(out.max_pairwise_deviation));
    return out;
}

Csv cmd_collapse(const RunSpec& spec) { return collapse(spec).csv; }

Csv cmd_oracle(const RunSpec& spec) {
    const auto profile = resolve_profile(spec);
    const auto rs = resonances_for(profile, spec.pole_pairs);
    const double energy = incidence_energy(spec, profile, rs.front());
    const double x0 = spec.x0_nm.value_or(well_center(profile));
    const double tmax = spec.tmax_ps.value_or(3.0);
    const int n = spec.points.value_or(60);
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) grid[i] = tmax * (i + 1) / n;

    GridOracleSettings settings;
    settings.dt = spec.dt_ps;
    settings.dx = spec.dx_nm;
    const auto cn = crank_nicolson_reference(profile, energy, x0, grid, settings);
    const BuildupModel model(profile, energy, rs);
    const auto series = time_series(model, x0, grid, spec.pole_pairs, false);

    Csv csv = with_header(spec, &profile);
    csv.meta.push_back(param("energy_mev", energy / units::mev));
    csv.meta.push_back(param("x0_nm", x0));
    csv.meta.push_back(param("tmax_ps", tmax));
    csv.meta.push_back(param("points", n));
    csv.meta.push_back(param("dt_ps", settings.dt));
    csv.meta.push_back(param("dx_nm", settings.dx));
    csv.columns = {"t_ps", "crank_nicolson", "resonance_expansion", "relative_difference"};
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv.rows.push_back({grid[i], cn.values[i], series.values[i], (series.values[i] - cn.values[i]) / cn.values[i]});
    return csv;
}

Csv execute(const RunSpec& spec) {
    spec.validate();
    switch (spec.command) {
        case Command::transmission: return cmd_transmission(spec);
        case Command::poles: return cmd_poles(spec);
        case Command::evolve: return cmd_evolve(spec);
        case Command::snapshot: return cmd_snapshot(spec);
        case Command::onelevel: return cmd_onelevel(spec);
        case Command::collapse: return cmd_collapse(spec);
        case Command::oracle: return cmd_oracle(spec);
    }
    throw ConfigError("unknown command");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transient buildup inside double-barrier resonant structures"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    RunSpec spec;
    std::string gamma_model = "transmission";
    std::string side = "below";

    auto common = [&](CLI::App* sub, Command cmd, bool profile) {
        sub->callback([&spec, cmd] { spec.command = cmd; });
        if (profile) {
            auto* p = sub->add_option("--preset", spec.preset, "Built-in system: A, B or C");
            auto* f = sub->add_option("--profile", spec.profile_path, "Profile config file");
            p->excludes(f);
        }
        sub->add_option("--out", spec.out, "Output CSV path (default: stdout)");
        sub->add_option("--points", spec.points, "Number of grid points");
    };
    auto energy_opts = [&](CLI::App* sub) {
        sub->add_option("--energy-mev", spec.energy_mev, "Incidence energy (meV)");
        sub->add_option("--gamma", spec.gamma, "Select the energy by T(E)/T(eps1) = gamma");
        sub->add_option("--gamma-model", gamma_model, "transmission | breit-wigner")
            ->check(CLI::IsMember({"transmission", "breit-wigner"}));
        sub->add_option("--side", side, "below | above the resonance")->check(CLI::IsMember({"below", "above"}));
        sub->add_option("--pole-pairs", spec.pole_pairs, "Resonance pole pairs kept in the expansion");
    };

    auto* tr = app.add_subcommand("transmission", "T(E) sweep");
    common(tr, Command::transmission, true);
    tr->add_option("--emin-mev", spec.emin_mev, "Lower energy (meV)");
    tr->add_option("--emax-mev", spec.emax_mev, "Upper energy (meV)");

    auto* po = app.add_subcommand("poles", "Resonance poles, widths and partial widths");
    common(po, Command::poles, true);
    po->add_option("--emax-mev", spec.pole_emax_mev, "Search limit (meV; default: barrier top)");
    po->add_option("--count", spec.count, "Maximum number of resonances");

    auto* ev = app.add_subcommand("evolve", "|Psi(x0,t)|^2 time series");
    common(ev, Command::evolve, true);
    energy_opts(ev);
    ev->add_option("--x0-nm", spec.x0_nm, "Observation point (default: well centre)");
    auto* tmax = ev->add_option("--tmax-ps", spec.tmax_ps, "End time (ps)");
    auto* taumax = ev->add_option("--taumax", spec.taumax, "End time in lifetimes");
    tmax->excludes(taumax);

    auto* sn = app.add_subcommand("snapshot", "|Psi(x,t)|^2 profiles across the structure");
    common(sn, Command::snapshot, true);
    energy_opts(sn);
    sn->add_option("--times-ps", spec.times_ps, "Snapshot times (ps)")->delimiter(',');

    auto* ol = app.add_subcommand("onelevel", "One-level formula, envelope and upper envelope");
    common(ol, Command::onelevel, false);
    ol->add_option("--gamma", spec.gamma, "T(E)/T(eps1)");
    ol->add_option("--omega", spec.omega, "Detuning in widths");
    ol->add_option("--taumax", spec.taumax, "End time in lifetimes");

    auto* co = app.add_subcommand("collapse", "Normalized buildup of several systems at equal gamma");
    common(co, Command::collapse, false);
    co->add_option("--gamma", spec.gamma, "T(E)/T(eps1)")->required();
    co->add_option("--presets", spec.presets, "Systems to compare")->delimiter(',');
    co->add_option("--taumin", spec.taumin, "First tau sample");
    co->add_option("--taumax", spec.taumax, "Last tau sample");
    co->add_option("--gamma-model", gamma_model, "transmission | breit-wigner")
        ->check(CLI::IsMember({"transmission", "breit-wigner"}));
    co->add_option("--side", side, "below | above the resonance")->check(CLI::IsMember({"below", "above"}));
    co->add_option("--pole-pairs", spec.pole_pairs, "Resonance pole pairs kept in the expansion");

    auto* orc = app.add_subcommand("oracle", "Crank-Nicolson grid solution against the resonance expansion");
    common(orc, Command::oracle, true);
    energy_opts(orc);
    orc->add_option("--x0-nm", spec.x0_nm, "Observation point (default: well centre)");
    orc->add_option("--tmax-ps", spec.tmax_ps, "End time (ps)");
    orc->add_option("--dt-ps", spec.dt_ps, "Time step (ps), at most 1e-4");
    orc->add_option("--dx-nm", spec.dx_nm, "Grid spacing (nm), at most 0.01");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    spec.gamma_model = gamma_model == "breit-wigner" ? GammaModel::breit_wigner : GammaModel::transmission;
    spec.below = side == "below";

    try {
        const Csv csv = execute(spec);
        const std::string text = csv.str();
        if (spec.out) {
            std::ofstream f(*spec.out, std::ios::binary);
            if (!f) throw IoError("cannot open output file '" + *spec.out + "'");
            f << text;
            if (!f) throw IoError("failed writing '" + *spec.out + "'");
        } else {
            out << text;
        }
        for (const auto& t : csv.trailer)
            if (t.rfind("warning", 0) == 0 || t.rfind("max_pairwise", 0) == 0) err << t << '\n';
        return 0;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return 4;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace resbuild::cli
