#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace resbuild {

/// One layer of constant potential.
struct Segment {
    double width_nm = 0.0;
    double height_ev = 0.0;

    bool operator==(const Segment&) const = default;
};

/// Piecewise-constant potential on [0, L], zero outside. Segments are
/// half-open [x_i, x_{i+1}); the last one also owns x = L.
class PotentialProfile {
public:
    PotentialProfile(std::vector<Segment> segments, double mass_ratio, std::string label = {});

    const std::vector<Segment>& segments() const { return segments_; }
    double mass_ratio() const { return mass_ratio_; }
    const std::string& label() const { return label_; }
    double length() const { return length_; }

    /// Left edge of segment i (i == size() gives L).
    double boundary(std::size_t i) const { return edges_.at(i); }

    /// Index of the segment containing x; x must lie in [0, L].
    std::size_t segment_index(double x) const;

    /// Highest segment value (eV).
    double max_height() const;

    bool operator==(const PotentialProfile& o) const {
        return segments_ == o.segments_ && mass_ratio_ == o.mass_ratio_ && label_ == o.label_;
    }

private:
    std::vector<Segment> segments_;
    std::vector<double> edges_;
    double mass_ratio_;
    std::string label_;
    double length_ = 0.0;
};

enum class Preset { A, B, C };

/// Double-barrier systems A, B and C (GaAs effective mass 0.067).
PotentialProfile preset(Preset name);
PotentialProfile preset(std::string_view name);

double potential_at(const PotentialProfile& profile, double x);

/// Centre of the well for three-segment barrier/well/barrier profiles;
/// falls back to L/2 otherwise.
double well_center(const PotentialProfile& profile);

/// Profile config text: `label = ...`, `mass_ratio = ...`, repeated
/// `segment = <width_nm> <height_eV>`, `#` comments.
PotentialProfile parse_profile(std::string_view text);
std::string serialize_profile(const PotentialProfile& profile);
PotentialProfile load_profile(const std::string& path);

/// FNV-1a of the serialized profile, hex encoded.
std::string profile_hash(const PotentialProfile& profile);

}  // namespace resbuild
