#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "resbuild/potential.hpp"

namespace resbuild::cli {

inline constexpr const char* kVersion = "1.0.0";

enum class Command { transmission, poles, evolve, snapshot, onelevel, collapse, oracle };

enum class GammaModel {
    transmission,  // bisection on the computed T(E)
    breit_wigner   // E = eps -/+ omega(gamma) * Gamma from the extracted pole
};

/// Parsed command line. Energies are in meV, lengths in nm, times in ps.
struct RunSpec {
    Command command = Command::transmission;
    std::optional<std::string> preset;
    std::optional<std::string> profile_path;

    std::optional<double> energy_mev;
    std::optional<double> gamma;
    std::optional<double> omega;
    std::optional<double> x0_nm;
    std::optional<double> tmax_ps;
    std::optional<double> taumax;
    double taumin = 0.5;
    std::optional<int> points;
    int pole_pairs = 1;
    std::optional<std::string> out;

    double emin_mev = 1.0;
    double emax_mev = 200.0;
    std::optional<double> pole_emax_mev;
    int count = 1;
    std::vector<std::string> presets{"A", "B", "C"};
    std::vector<double> times_ps{0.04, 0.4, 0.8, 1.2};
    GammaModel gamma_model = GammaModel::transmission;
    bool below = true;
    double dt_ps = 1e-4;
    double dx_nm = 0.01;

    /// Throws ConfigError on violated invariants (grid sizes, profile source).
    void validate() const;
};

/// CSV document: `#` metadata lines, one header row, numeric rows printed
/// with 12 significant digits, then optional trailing `#` summary lines.
struct Csv {
    std::vector<std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> trailer;

    std::string str() const;
};

std::string format_number(double v);

/// Resolve the profile named by --preset or --profile.
PotentialProfile resolve_profile(const RunSpec& spec);

Csv cmd_transmission(const RunSpec& spec);
Csv cmd_poles(const RunSpec& spec);
Csv cmd_evolve(const RunSpec& spec);
Csv cmd_snapshot(const RunSpec& spec);
Csv cmd_onelevel(const RunSpec& spec);
Csv cmd_oracle(const RunSpec& spec);

struct CollapseSystem {
    std::string label;
    double energy_mev;
    double resonance_mev;
    double width_mev;
    double omega;
};

struct CollapseResult {
    Csv csv;
    std::vector<CollapseSystem> systems;
    std::vector<std::string> warnings;
    /// Largest |difference| between any two curves (systems and the
    /// one-level formula) over the tau grid.
    double max_pairwise_deviation = 0.0;
};

CollapseResult collapse(const RunSpec& spec);
Csv cmd_collapse(const RunSpec& spec);

Csv execute(const RunSpec& spec);

/// Full command-line entry point. Exit codes: 0 success, 2 usage error,
/// 3 numerical failure, 4 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resbuild::cli
