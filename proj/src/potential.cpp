#include "resbuild/potential.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "resbuild/errors.hpp"

namespace resbuild {

PotentialProfile::PotentialProfile(std::vector<Segment> segments, double mass_ratio, std::string label)
    : segments_(std::move(segments)), mass_ratio_(mass_ratio), label_(std::move(label)) {
    if (segments_.empty()) throw ConfigError("potential profile needs at least one segment");
    if (!(mass_ratio_ > 0.0) || !std::isfinite(mass_ratio_)) throw ConfigError("mass_ratio must be positive and finite");
    edges_.reserve(segments_.size() + 1);
    edges_.push_back(0.0);
    for (const auto& s : segments_) {
        if (!(s.width_nm > 0.0) || !std::isfinite(s.width_nm)) throw ConfigError("segment widths must be positive and finite");
        if (!std::isfinite(s.height_ev)) throw ConfigError("segment heights must be finite");
        length_ += s.width_nm;
        edges_.push_back(length_);
    }
}

std::size_t PotentialProfile::segment_index(double x) const {
    auto it = std::upper_bound(edges_.begin() + 1, edges_.end() - 1, x);
    return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

double PotentialProfile::max_height() const {
    double v = segments_.front().height_ev;
    for (const auto& s : segments_) v = std::max(v, s.height_ev);
    return v;
}

PotentialProfile preset(Preset name) {
    switch (name) {
        case Preset::A: return PotentialProfile({{5.0, 0.23}, {5.0, 0.0}, {5.0, 0.23}}, 0.067, "A");
        case Preset::B: return PotentialProfile({{3.0, 0.5}, {10.0, 0.0}, {3.0, 0.5}}, 0.067, "B");
        case Preset::C: return PotentialProfile({{3.0, 0.45}, {8.0, 0.0}, {10.0, 0.35}}, 0.067, "C");
    }
    throw ConfigError("unknown preset");
}

PotentialProfile preset(std::string_view name) {
    if (name == "A" || name == "a") return preset(Preset::A);
    if (name == "B" || name == "b") return preset(Preset::B);
    if (name == "C" || name == "c") return preset(Preset::C);
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected A, B or C)");
}

double potential_at(const PotentialProfile& profile, double x) {
    if (x < 0.0 || x > profile.length()) return 0.0;
    return profile.segments()[profile.segment_index(x)].height_ev;
}

double well_center(const PotentialProfile& profile) {
    const auto& s = profile.segments();
    if (s.size() == 3 && s[1].height_ev < s[0].height_ev && s[1].height_ev < s[2].height_ev)
        return s[0].width_nm + 0.5 * s[1].width_nm;
    return 0.5 * profile.length();
}

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view tok, int line, const char* what) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ConfigError("line " + std::to_string(line) + ": invalid " + what + " '" + std::string(tok) + "'");
    return v;
}

}  // namespace

PotentialProfile parse_profile(std::string_view text) {
    std::string label;
    double mass = 0.0;
    bool have_mass = false;
    std::vector<Segment> segments;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));

        if (key == "label") {
            label = std::string(value);
        } else if (key == "mass_ratio") {
            mass = parse_number(value, line_no, "mass_ratio");
            if (!(mass > 0.0)) throw ConfigError("line " + std::to_string(line_no) + ": mass_ratio must be positive");
            have_mass = true;
        } else if (key == "segment") {
            auto sp = value.find_first_of(" \t");
            if (sp == std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": segment needs '<width_nm> <height_eV>'");
            auto w_tok = trim(value.substr(0, sp));
            auto h_tok = trim(value.substr(sp));
            if (h_tok.find_first_of(" \t") != std::string_view::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": segment takes exactly two numbers");
            double w = parse_number(w_tok, line_no, "segment width");
            double h = parse_number(h_tok, line_no, "segment height");
            if (!(w > 0.0)) throw ConfigError("line " + std::to_string(line_no) + ": segment width must be positive");
            segments.push_back({w, h});
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
        }
    }
    if (!have_mass) throw ConfigError("missing key 'mass_ratio'");
    if (segments.empty()) throw ConfigError("no 'segment' lines");
    return PotentialProfile(std::move(segments), mass, std::move(label));
}

std::string serialize_profile(const PotentialProfile& profile) {
    std::ostringstream os;
    char buf[64];
    os << "label = " << profile.label() << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", profile.mass_ratio());
    os << "mass_ratio = " << buf << '\n';
    for (const auto& s : profile.segments()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", s.width_nm, s.height_ev);
        os << "segment = " << buf << '\n';
    }
    return os.str();
}

PotentialProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open profile file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_profile(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string profile_hash(const PotentialProfile& profile) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_profile(profile)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace resbuild
