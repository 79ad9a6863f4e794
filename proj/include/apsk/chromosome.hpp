#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "apsk/geometry.hpp"

namespace apsk {

/// Binds gene positions to their meaning: the first rings-1 genes are the
/// inner radii (outer radius is pinned to 1), followed by one block of
/// sector angles per ring, innermost ring first. Ring membership is
/// positional, so optimizer moves can never migrate a symbol between rings.
struct GeneLayout {
    RingLayout rings;
    Symmetry symmetry = Symmetry::Quadrant;

    GeneLayout() = default;
    GeneLayout(RingLayout r, Symmetry s) : rings(std::move(r)), symmetry(s) {
        rings.validate();
        if (symmetry == Symmetry::None)
            throw config_error("chromosome encoding requires quadrant or vertical symmetry");
        if (!rings.compatible_with(symmetry))
            throw config_error("ring layout incompatible with symmetry class");
    }

    int fold() const { return symmetry_fold(symmetry); }
    int radius_genes() const { return rings.rings() - 1; }
    int sector_count(int ring) const { return rings.counts[ring] / fold(); }

    int angle_genes() const {
        int t = 0;
        for (int k = 0; k < rings.rings(); ++k) t += sector_count(k);
        return t;
    }

    int total_genes() const { return radius_genes() + angle_genes(); }

    double sector_lo() const { return angle_origin(symmetry); }
    double sector_width() const { return two_pi / fold(); }

    /// Gene index of the first angle of `ring`.
    int angle_offset(int ring) const {
        int off = radius_genes();
        for (int k = 0; k < ring; ++k) off += sector_count(k);
        return off;
    }

    bool operator==(const GeneLayout&) const = default;
};

struct Chromosome {
    GeneLayout layout;
    std::vector<double> genes;

    Chromosome() = default;
    Chromosome(GeneLayout l, std::vector<double> g)
        : layout(std::move(l)), genes(std::move(g)) {
        if (static_cast<int>(genes.size()) != layout.total_genes())
            throw std::invalid_argument("gene count does not match layout");
    }
};

namespace detail {

inline constexpr double radius_margin = 1e-3;   // radius genes live in [m, 1-m]
inline constexpr double min_gap = 1e-3;         // between genes of one ring / radii
inline constexpr double angle_margin = 5e-4;    // from sector edges, so mirrored
                                                // symbols stay >= min_gap apart

/// Enforce pairwise gaps >= `gap` on sorted values, moving merged clusters
/// as little as possible (each cluster is respaced about its mean), then
/// clamp into [lo, hi]. Assumes (hi - lo) comfortably exceeds n * gap.
inline void respace_sorted(std::vector<double>& v, double gap, double lo, double hi) {
    struct Cluster {
        double sum;
        int n;
        double center() const { return sum / n; }
        double low(double g) const { return center() - 0.5 * (n - 1) * g; }
        double high(double g) const { return center() + 0.5 * (n - 1) * g; }
    };
    std::vector<Cluster> cl;
    for (double x : v) {
        cl.push_back({x, 1});
        while (cl.size() >= 2 &&
               cl[cl.size() - 2].high(gap) + gap > cl.back().low(gap)) {
            cl[cl.size() - 2].sum += cl.back().sum;
            cl[cl.size() - 2].n += cl.back().n;
            cl.pop_back();
        }
    }
    std::size_t i = 0;
    for (const auto& c : cl) {
        const double base = c.low(gap);
        for (int j = 0; j < c.n; ++j) v[i++] = base + j * gap;
    }
    // bound clamping with gap-preserving sweeps
    v[0] = std::max(v[0], lo);
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = std::max(v[k], v[k - 1] + gap);
    v.back() = std::min(v.back(), hi);
    for (std::size_t k = v.size() - 1; k-- > 0;) v[k] = std::min(v[k], v[k + 1] - gap);
    v[0] = std::max(v[0], lo);
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = std::max(v[k], v[k - 1] + gap);
}

inline std::vector<double> repair_pass(const GeneLayout& layout,
                                       std::vector<double> g) {
    const int nr = layout.radius_genes();
    if (nr > 0) {
        std::vector<double> radii(g.begin(), g.begin() + nr);
        for (double& r : radii) {
            if (!std::isfinite(r)) r = 0.5;
            r = std::clamp(r, radius_margin, 1.0 - radius_margin);
        }
        std::sort(radii.begin(), radii.end());
        respace_sorted(radii, min_gap, radius_margin, 1.0 - radius_margin);
        std::copy(radii.begin(), radii.end(), g.begin());
    }
    const double lo = layout.sector_lo() + angle_margin;
    const double hi = layout.sector_lo() + layout.sector_width() - angle_margin;
    for (int ring = 0; ring < layout.rings.rings(); ++ring) {
        const int off = layout.angle_offset(ring);
        const int h = layout.sector_count(ring);
        std::vector<std::pair<double, int>> tagged(h);
        for (int s = 0; s < h; ++s) {
            double a = g[off + s];
            if (!std::isfinite(a)) a = layout.sector_lo();
            a = std::fmod(a - layout.sector_lo(), layout.sector_width());
            if (a < 0.0) a += layout.sector_width();
            a += layout.sector_lo();
            tagged[s] = {std::clamp(a, lo, hi), s};
        }
        std::sort(tagged.begin(), tagged.end());
        std::vector<double> vals(h);
        for (int s = 0; s < h; ++s) vals[s] = tagged[s].first;
        respace_sorted(vals, min_gap, lo, hi);
        for (int s = 0; s < h; ++s) g[off + tagged[s].second] = vals[s];
    }
    return g;
}

}  // namespace detail

/// Total repair: clamps radius genes into (0,1) and sorts them, wraps angle
/// genes into their symmetry sector, and separates everything by at least
/// 1e-3 (radius units / radians). Iterated to a bitwise fixed point, so
/// repair(repair(x)) == repair(x).
inline Chromosome repair(Chromosome c) {
    for (int iter = 0; iter < 64; ++iter) {
        auto next = detail::repair_pass(c.layout, c.genes);
        const bool stable = next == c.genes;
        c.genes = std::move(next);
        if (stable) break;
    }
    return c;
}

/// Expand a gene vector into the full constellation. Sector slots keep the
/// gene values verbatim; mirror slots are appended per symmetry class, so
/// slot order within ring of size n is: sector genes (h = n/fold slots),
/// then the reflected blocks. Labels come from the mapping's explicit slots.
inline Constellation decode(const Chromosome& ch, const Mapping& mapping) {
    const GeneLayout& L = ch.layout;
    if (mapping.layout() != L.rings)
        throw std::invalid_argument("mapping does not match chromosome layout");
    if (static_cast<int>(ch.genes.size()) != L.total_genes())
        throw std::invalid_argument("gene count does not match layout");

    Constellation c;
    c.layout = L.rings;
    c.mapping = mapping;
    c.symmetry = L.symmetry;

    c.radii.assign(ch.genes.begin(), ch.genes.begin() + L.radius_genes());
    for (double r : c.radii)
        if (!(r > 0.0 && r < 1.0))
            throw std::invalid_argument("radius gene outside (0, 1)");
    for (std::size_t k = 1; k < c.radii.size(); ++k)
        if (c.radii[k] <= c.radii[k - 1])
            throw std::invalid_argument("radius ordering violated");
    c.radii.push_back(1.0);

    const double lo = L.sector_lo();
    const double w = L.sector_width();
    for (int ring = 0; ring < L.rings.rings(); ++ring) {
        const int off = L.angle_offset(ring);
        const int h = L.sector_count(ring);
        std::vector<double> ang;
        ang.reserve(L.rings.counts[ring]);
        for (int s = 0; s < h; ++s) {
            const double a = ch.genes[off + s];
            if (!(a >= lo && a < lo + w))
                throw std::invalid_argument("angle gene outside symmetry sector");
            ang.push_back(a);
        }
        if (L.symmetry == Symmetry::Quadrant) {
            using std::numbers::pi;
            for (int s = 0; s < h; ++s)
                ang.push_back(canonical_angle(pi - ang[h - 1 - s], c.symmetry));
            for (int s = 0; s < h; ++s)
                ang.push_back(canonical_angle(pi + ang[s], c.symmetry));
            for (int s = 0; s < h; ++s)
                ang.push_back(canonical_angle(two_pi - ang[h - 1 - s], c.symmetry));
        } else {
            for (int s = 0; s < h; ++s)
                ang.push_back(canonical_angle(std::numbers::pi - ang[h - 1 - s], c.symmetry));
        }
        c.angles.push_back(std::move(ang));
    }
    c.validate();
    return c;
}

inline Constellation decode(const std::vector<double>& genes, const RingLayout& layout,
                            Symmetry symmetry, const Mapping& mapping) {
    return decode(Chromosome(GeneLayout(layout, symmetry), genes), mapping);
}

/// Inverse of decode. The constellation must respect its symmetry class:
/// every mirror slot must sit within 1e-12 rad of the reflection of its
/// sector partner. Gene values are taken verbatim from the sector slots,
/// so encode(decode(g)) == g bit-exactly.
inline Chromosome encode(const Constellation& c) {
    c.validate();
    GeneLayout L(c.layout, c.symmetry);

    constexpr double tol = 1e-12;
    auto check = [&](double actual, double expect) {
        if (angular_distance(actual, expect) > tol)
            throw config_error("constellation violates claimed symmetry");
    };

    std::vector<double> genes;
    genes.reserve(L.total_genes());
    for (int k = 0; k + 1 < c.rings(); ++k) genes.push_back(c.radii[k]);

    const double lo = L.sector_lo();
    const double w = L.sector_width();
    using std::numbers::pi;
    for (int ring = 0; ring < c.rings(); ++ring) {
        const int h = L.sector_count(ring);
        const auto& ang = c.angles[ring];
        for (int s = 0; s < h; ++s) {
            if (!(ang[s] >= lo && ang[s] < lo + w))
                throw config_error("sector slot angle outside symmetry sector");
            genes.push_back(ang[s]);
        }
        if (L.symmetry == Symmetry::Quadrant) {
            for (int s = 0; s < h; ++s) {
                check(ang[h + s], pi - ang[h - 1 - s]);
                check(ang[2 * h + s], pi + ang[s]);
                check(ang[3 * h + s], two_pi - ang[h - 1 - s]);
            }
        } else {
            for (int s = 0; s < h; ++s) check(ang[h + s], pi - ang[h - 1 - s]);
        }
    }
    return Chromosome(std::move(L), std::move(genes));
}

}  // namespace apsk
