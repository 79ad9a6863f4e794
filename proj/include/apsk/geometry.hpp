#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "apsk/errors.hpp"

namespace apsk {

using Complex = std::complex<double>;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Symmetry class of a constellation / chromosome encoding.
/// Quadrant: invariant under reflection about both axes (4-fold).
/// Vertical: invariant under reflection about the vertical axis (2-fold).
enum class Symmetry { Quadrant, Vertical, None };

inline std::string to_string(Symmetry s) {
    switch (s) {
        case Symmetry::Quadrant: return "quadrant";
        case Symmetry::Vertical: return "vertical";
        default: return "none";
    }
}

inline Symmetry symmetry_from_string(const std::string& s) {
    if (s == "quadrant") return Symmetry::Quadrant;
    if (s == "vertical") return Symmetry::Vertical;
    if (s == "none") return Symmetry::None;
    throw config_error("unknown symmetry: " + s);
}

/// Fold factor: how many symbols one stored sector angle expands to.
inline int symmetry_fold(Symmetry s) {
    switch (s) {
        case Symmetry::Quadrant: return 4;
        case Symmetry::Vertical: return 2;
        default: return 1;
    }
}

/// Angles are stored in [origin, origin + 2*pi). The vertical sector is
/// [-pi/2, pi/2), so vertical constellations keep right-half angles
/// verbatim (possibly negative); that makes encode/decode bit-exact on
/// gene values.
inline double angle_origin(Symmetry s) {
    return s == Symmetry::Vertical ? -std::numbers::pi / 2.0 : 0.0;
}

/// Reduce an angle into [origin, origin + 2*pi).
inline double canonical_angle(double a, Symmetry s) {
    const double lo = angle_origin(s);
    double r = std::fmod(a - lo, two_pi);
    if (r < 0.0) r += two_pi;
    return r + lo;
}

/// Cyclic angular distance in [0, pi].
inline double angular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), two_pi);
    return std::min(d, two_pi - d);
}

/// Symbols per ring, innermost first.
struct RingLayout {
    std::vector<int> counts;

    RingLayout() = default;
    RingLayout(std::initializer_list<int> c) : counts(c) {}
    explicit RingLayout(std::vector<int> c) : counts(std::move(c)) {}

    int rings() const { return static_cast<int>(counts.size()); }

    int total() const {
        int t = 0;
        for (int c : counts) t += c;
        return t;
    }

    void validate() const {
        if (counts.empty()) throw config_error("ring layout is empty");
        for (int c : counts)
            if (c < 1) throw config_error("ring count must be >= 1");
    }

    bool compatible_with(Symmetry s) const {
        const int fold = symmetry_fold(s);
        return std::all_of(counts.begin(), counts.end(),
                           [fold](int c) { return c % fold == 0; });
    }

    bool operator==(const RingLayout&) const = default;
};

/// Label table: labels[ring][slot] is a permutation of 0..M-1.
struct Mapping {
    std::vector<std::vector<int>> labels;

    RingLayout layout() const {
        std::vector<int> c;
        c.reserve(labels.size());
        for (const auto& ring : labels) c.push_back(static_cast<int>(ring.size()));
        return RingLayout(std::move(c));
    }

    int alphabet_size() const { return layout().total(); }

    void validate() const {
        const int m = alphabet_size();
        if (m < 1) throw config_error("mapping is empty");
        std::vector<int> seen(m, 0);
        for (const auto& ring : labels) {
            for (int lab : ring) {
                if (lab < 0 || lab > 63)
                    throw config_error("label out of range 0..63: " + std::to_string(lab));
                if (lab >= m)
                    throw config_error("label exceeds alphabet size: " + std::to_string(lab));
                if (seen[lab]++)
                    throw config_error("duplicate label: " + std::to_string(lab));
            }
        }
    }

    bool operator==(const Mapping&) const = default;
};

/// Slot s of ring r gets label r*offset + s.
inline Mapping identity_mapping(const RingLayout& layout) {
    layout.validate();
    Mapping m;
    int next = 0;
    for (int c : layout.counts) {
        std::vector<int> ring(c);
        for (int& lab : ring) lab = next++;
        m.labels.push_back(std::move(ring));
    }
    return m;
}

/// Parse a mapping from "ring slot label" triples, one per line,
/// 0-indexed, '#' comments allowed. Ring sizes are inferred; every slot
/// must appear exactly once and the labels must form a permutation.
inline Mapping load_mapping(std::istream& in) {
    struct Triple { int ring, slot, label; };
    std::vector<Triple> triples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Triple t;
        if (!(ls >> t.ring)) continue;  // blank / comment-only line
        if (!(ls >> t.slot >> t.label))
            throw config_error("mapping line " + std::to_string(lineno) +
                               ": expected 'ring slot label'");
        std::string extra;
        if (ls >> extra)
            throw config_error("mapping line " + std::to_string(lineno) +
                               ": trailing token '" + extra + "'");
        if (t.ring < 0 || t.slot < 0)
            throw config_error("mapping line " + std::to_string(lineno) +
                               ": negative ring or slot");
        triples.push_back(t);
    }
    if (triples.empty()) throw config_error("mapping file has no entries");

    int rings = 0;
    for (const auto& t : triples) rings = std::max(rings, t.ring + 1);
    std::vector<int> counts(rings, 0);
    for (const auto& t : triples) counts[t.ring] = std::max(counts[t.ring], t.slot + 1);

    Mapping m;
    for (int c : counts) m.labels.emplace_back(c, -1);
    for (const auto& t : triples) {
        int& cell = m.labels[t.ring][t.slot];
        if (cell != -1)
            throw config_error("duplicate slot: ring " + std::to_string(t.ring) +
                               " slot " + std::to_string(t.slot));
        cell = t.label;
    }
    for (int r = 0; r < rings; ++r)
        for (int s = 0; s < counts[r]; ++s)
            if (m.labels[r][s] == -1)
                throw config_error("missing slot: ring " + std::to_string(r) +
                                   " slot " + std::to_string(s));
    m.validate();
    return m;
}

inline Mapping load_mapping_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open mapping file: " + path);
    try {
        return load_mapping(in);
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

inline void save_mapping(const Mapping& m, std::ostream& out) {
    for (std::size_t r = 0; r < m.labels.size(); ++r)
        for (std::size_t s = 0; s < m.labels[r].size(); ++s)
            out << r << ' ' << s << ' ' << m.labels[r][s] << '\n';
}

/// An APSK constellation: concentric rings of symbols, each symbol a
/// (radius, angle) position carrying a bit label from the mapping.
/// Slot order within a ring follows ascending angle for constructed
/// constellations; decoded chromosomes keep gene order (see chromosome.hpp).
struct Constellation {
    RingLayout layout;
    std::vector<double> radii;                // ascending, outermost == 1
    std::vector<std::vector<double>> angles;  // [ring][slot], canonical range
    Mapping mapping;
    Symmetry symmetry = Symmetry::None;

    int size() const { return layout.total(); }
    int rings() const { return layout.rings(); }

    int label(int ring, int slot) const { return mapping.labels[ring][slot]; }

    Complex point(int ring, int slot) const {
        const double a = angles[ring][slot];
        return {radii[ring] * std::cos(a), radii[ring] * std::sin(a)};
    }

    struct Symbol {
        int ring;
        int slot;
        int label;
        double radius;
        double angle;
        Complex point;
    };

    std::vector<Symbol> symbols() const {
        std::vector<Symbol> out;
        out.reserve(size());
        for (int r = 0; r < rings(); ++r)
            for (int s = 0; s < layout.counts[r]; ++s)
                out.push_back({r, s, label(r, s), radii[r], angles[r][s], point(r, s)});
        return out;
    }

    void validate() const {
        layout.validate();
        mapping.validate();
        if (mapping.layout() != layout)
            throw config_error("mapping does not match ring layout");
        if (static_cast<int>(radii.size()) != rings() ||
            static_cast<int>(angles.size()) != rings())
            throw config_error("radii/angles size does not match layout");
        if (radii.front() <= 0.0)
            throw config_error("innermost radius must be positive");
        for (std::size_t k = 1; k < radii.size(); ++k)
            if (radii[k] <= radii[k - 1])
                throw config_error("radii must be strictly increasing");
        if (radii.back() != 1.0)
            throw config_error("outer radius must equal 1");
        const double lo = angle_origin(symmetry);
        for (int r = 0; r < rings(); ++r) {
            const auto& ring = angles[r];
            if (static_cast<int>(ring.size()) != layout.counts[r])
                throw config_error("angle count does not match layout");
            for (double a : ring)
                if (!(a >= lo && a < lo + two_pi))
                    throw config_error("angle outside canonical range");
            for (std::size_t i = 0; i < ring.size(); ++i)
                for (std::size_t j = i + 1; j < ring.size(); ++j)
                    if (ring[i] == ring[j])
                        throw config_error("coincident angles within a ring");
        }
    }
};

inline Symmetry infer_symmetry(const RingLayout& layout) {
    if (layout.compatible_with(Symmetry::Quadrant)) return Symmetry::Quadrant;
    if (layout.compatible_with(Symmetry::Vertical)) return Symmetry::Vertical;
    return Symmetry::None;
}

/// Uniform constellation: ring k holds counts[k] equally spaced symbols.
/// Rings whose count is divisible by 4 get a half-slot phase offset of
/// pi/count, which keeps symbols off the axes (required for the mirror
/// expansions); other rings start at angle 0.
inline Constellation build_uniform(const RingLayout& layout,
                                   const std::vector<double>& radii,
                                   const Mapping& mapping,
                                   Symmetry symmetry) {
    layout.validate();
    mapping.validate();
    if (mapping.layout() != layout)
        throw config_error("mapping does not match ring layout");
    if (radii.size() != layout.counts.size())
        throw config_error("need one radius per ring");
    for (std::size_t k = 1; k < radii.size(); ++k)
        if (radii[k] <= radii[k - 1])
            throw config_error("radii must be strictly increasing");
    if (radii.front() <= 0.0 || radii.back() != 1.0)
        throw config_error("radii must lie in (0, 1] with outer radius 1");

    Constellation c;
    c.layout = layout;
    c.radii = radii;
    c.mapping = mapping;
    c.symmetry = symmetry;
    for (int n : layout.counts) {
        std::vector<double> ring(n);
        for (int j = 0; j < n; ++j) {
            const double a = (n % 4 == 0) ? (2 * j + 1) * std::numbers::pi / n
                                          : two_pi * j / n;
            ring[j] = canonical_angle(a, symmetry);
        }
        std::sort(ring.begin(), ring.end());
        c.angles.push_back(std::move(ring));
    }
    c.validate();
    return c;
}

inline Constellation build_uniform(const RingLayout& layout,
                                   const std::vector<double>& radii,
                                   const Mapping& mapping) {
    return build_uniform(layout, radii, mapping, infer_symmetry(layout));
}

/// Key-value text export. Angles are printed normalized to [0, 2*pi)
/// with 12 significant digits.
inline void save_constellation(const Constellation& c, std::ostream& out,
                               const std::string& header = {}) {
    if (!header.empty()) {
        std::istringstream hs(header);
        std::string line;
        while (std::getline(hs, line)) out << "# " << line << '\n';
    }
    out << "layout";
    for (int n : c.layout.counts) out << ' ' << n;
    out << '\n';
    out << "symmetry " << to_string(c.symmetry) << '\n';
    char buf[64];
    out << "radii";
    for (double r : c.radii) {
        std::snprintf(buf, sizeof buf, "%.12g", r);
        out << ' ' << buf;
    }
    out << '\n';
    for (int r = 0; r < c.rings(); ++r)
        for (int s = 0; s < c.layout.counts[r]; ++s) {
            std::snprintf(buf, sizeof buf, "%.12g",
                          canonical_angle(c.angles[r][s], Symmetry::None));
            out << "symbol " << r << ' ' << buf << ' ' << c.label(r, s) << '\n';
        }
}

inline void save_constellation_file(const Constellation& c, const std::string& path,
                                    const std::string& header = {}) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write constellation file: " + path);
    save_constellation(c, out, header);
    if (!out) throw io_error("write failed: " + path);
}

inline Constellation load_constellation(std::istream& in) {
    RingLayout layout;
    std::vector<double> radii;
    Symmetry symmetry = Symmetry::None;
    bool have_symmetry = false;
    struct Rec { int ring; double angle; int label; };
    std::vector<Rec> recs;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "layout") {
            int n;
            while (ls >> n) layout.counts.push_back(n);
        } else if (key == "symmetry") {
            std::string s;
            ls >> s;
            symmetry = symmetry_from_string(s);
            have_symmetry = true;
        } else if (key == "radii") {
            double r;
            while (ls >> r) radii.push_back(r);
        } else if (key == "symbol") {
            Rec rec;
            if (!(ls >> rec.ring >> rec.angle >> rec.label))
                throw config_error("constellation line " + std::to_string(lineno) +
                                   ": expected 'symbol ring angle label'");
            recs.push_back(rec);
        } else {
            throw config_error("constellation line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
        }
    }
    layout.validate();
    if (!have_symmetry) throw config_error("constellation file missing symmetry");
    if (static_cast<int>(recs.size()) != layout.total())
        throw config_error("constellation symbol count does not match layout");

    Constellation c;
    c.layout = layout;
    c.radii = radii;
    c.symmetry = symmetry;
    c.angles.assign(layout.rings(), {});
    c.mapping.labels.assign(layout.rings(), {});

    // slots by ascending canonical angle within each ring
    std::vector<std::vector<Rec>> per_ring(layout.rings());
    for (const auto& rec : recs) {
        if (rec.ring < 0 || rec.ring >= layout.rings())
            throw config_error("constellation symbol with bad ring index");
        per_ring[rec.ring].push_back(rec);
    }
    for (int r = 0; r < layout.rings(); ++r) {
        auto& ring = per_ring[r];
        if (static_cast<int>(ring.size()) != layout.counts[r])
            throw config_error("ring " + std::to_string(r) + " has wrong symbol count");
        for (auto& rec : ring) rec.angle = canonical_angle(rec.angle, symmetry);
        std::sort(ring.begin(), ring.end(),
                  [](const Rec& a, const Rec& b) { return a.angle < b.angle; });
        for (const auto& rec : ring) {
            c.angles[r].push_back(rec.angle);
            c.mapping.labels[r].push_back(rec.label);
        }
    }
    c.validate();
    return c;
}

inline Constellation load_constellation_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open constellation file: " + path);
    try {
        return load_constellation(in);
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

}  // namespace apsk
