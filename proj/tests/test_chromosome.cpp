#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "apsk/chromosome.hpp"
#include "apsk/rng.hpp"

using namespace apsk;
using std::numbers::pi;

namespace {

const std::string mapping_dir = std::string(APSK_SOURCE_DIR) + "/data/mappings/";

std::vector<double> random_raw_genes(const GeneLayout& L, SplitMix64& rng) {
    std::vector<double> g(L.total_genes());
    for (int i = 0; i < L.radius_genes(); ++i) g[i] = u01(rng.next());
    std::sort(g.begin(), g.begin() + L.radius_genes());
    for (int i = L.radius_genes(); i < L.total_genes(); ++i)
        g[i] = uniform_real(rng, L.sector_lo(), L.sector_lo() + L.sector_width());
    return g;
}

Chromosome random_valid(const GeneLayout& L, SplitMix64& rng) {
    return repair(Chromosome(L, random_raw_genes(L, rng)));
}

}  // namespace

TEST_CASE("gene counts per symmetry class", "[chromosome]") {
    REQUIRE(GeneLayout({4, 12, 20, 28}, Symmetry::Quadrant).total_genes() == 19);
    REQUIRE(GeneLayout({4, 12, 20, 28}, Symmetry::Vertical).total_genes() == 35);
    REQUIRE(GeneLayout({4, 12, 16, 32}, Symmetry::Vertical).total_genes() == 35);
    REQUIRE_THROWS_AS(GeneLayout({4, 6}, Symmetry::Quadrant), config_error);
    REQUIRE_THROWS_AS(GeneLayout({3, 6}, Symmetry::Vertical), config_error);
}

TEST_CASE("decode expands the symmetry sector", "[chromosome]") {
    SECTION("quadrant ring of 4 from one gene") {
        const GeneLayout L({4}, Symmetry::Quadrant);
        const auto c = decode(Chromosome(L, {pi / 4}), identity_mapping({4}));
        std::multiset<double> got(c.angles[0].begin(), c.angles[0].end());
        const double expect[] = {pi / 4, 3 * pi / 4, 5 * pi / 4, 7 * pi / 4};
        int i = 0;
        for (double a : got) CHECK(a == Catch::Approx(expect[i++]).margin(1e-15));
    }
    SECTION("vertical gene 0 gives an antipodal pair") {
        const GeneLayout L({2}, Symmetry::Vertical);
        const auto c = decode(Chromosome(L, {0.0}), identity_mapping({2}));
        REQUIRE(c.angles[0][0] == 0.0);
        REQUIRE(c.angles[0][1] == Catch::Approx(pi).margin(1e-15));
    }
    SECTION("ring counts are sector counts times the fold") {
        SplitMix64 rng(7);
        for (auto sym : {Symmetry::Quadrant, Symmetry::Vertical}) {
            const GeneLayout L({4, 12, 20, 28}, sym);
            const auto c = decode(random_valid(L, rng), identity_mapping({4, 12, 20, 28}));
            for (int r = 0; r < 4; ++r)
                REQUIRE(static_cast<int>(c.angles[r].size()) ==
                        L.sector_count(r) * symmetry_fold(sym));
        }
    }
    SECTION("peak power: outer radius is exactly 1") {
        SplitMix64 rng(9);
        const GeneLayout L({4, 12, 20, 28}, Symmetry::Vertical);
        const auto c = decode(random_valid(L, rng), identity_mapping({4, 12, 20, 28}));
        REQUIRE(c.radii.back() == 1.0);
        REQUIRE(*std::max_element(c.radii.begin(), c.radii.end()) == 1.0);
    }
    SECTION("contract violations") {
        const GeneLayout L3({4, 4, 4}, Symmetry::Quadrant);
        const Mapping id3 = identity_mapping({4, 4, 4});
        REQUIRE_THROWS_AS(decode(Chromosome(L3, {0.9, 0.2, 0.3, 0.5, 0.7}), id3),
                          std::invalid_argument);  // radius ordering
        const GeneLayout L({4, 4}, Symmetry::Quadrant);
        REQUIRE_THROWS_AS(decode(Chromosome(L, {0.5, 0.2, 2.0}), identity_mapping({4, 4})),
                          std::invalid_argument);  // angle outside sector
    }
}

TEST_CASE("encode/decode round trips", "[chromosome]") {
    const Mapping ccsds = load_mapping_file(mapping_dir + "ccsds-4-12-20-28.map");

    SECTION("uniform constellation encodes to 19 genes and back") {
        const auto c = build_uniform({4, 12, 20, 28}, {0.25, 0.5, 0.75, 1.0}, ccsds);
        const Chromosome ch = encode(c);
        REQUIRE(ch.genes.size() == 19);
        const auto back = decode(ch, ccsds);
        for (int r = 0; r < c.rings(); ++r)
            for (int s = 0; s < c.layout.counts[r]; ++s) {
                REQUIRE(std::abs(back.point(r, s).real() - c.point(r, s).real()) < 1e-12);
                REQUIRE(std::abs(back.point(r, s).imag() - c.point(r, s).imag()) < 1e-12);
            }
        REQUIRE(back.mapping == c.mapping);
    }
    SECTION("vertical uniform constellation encodes to 35 genes") {
        const Mapping prop = load_mapping_file(mapping_dir + "proposed-4-12-20-28.map");
        const auto c = build_uniform({4, 12, 20, 28}, {0.25, 0.5, 0.75, 1.0}, prop,
                                     Symmetry::Vertical);
        REQUIRE(encode(c).genes.size() == 35);
    }
    SECTION("encode(decode(g)) == g bit-exactly") {
        SplitMix64 rng(123);
        const Mapping id = identity_mapping({4, 12, 20, 28});
        for (auto sym : {Symmetry::Quadrant, Symmetry::Vertical}) {
            const GeneLayout L({4, 12, 20, 28}, sym);
            for (int t = 0; t < 100; ++t) {
                const Chromosome ch = random_valid(L, rng);
                const Chromosome back = encode(decode(ch, id));
                REQUIRE(back.genes == ch.genes);
            }
        }
    }
    SECTION("symmetry violations beyond 1e-12 are rejected") {
        auto c = build_uniform({4, 12, 20, 28}, {0.25, 0.5, 0.75, 1.0}, ccsds);
        auto bent = c;
        bent.angles[3][20] += 1e-9;
        REQUIRE_THROWS_AS(encode(bent), config_error);
        auto nudged = c;
        nudged.angles[3][20] += 1e-13;  // within tolerance
        REQUIRE_NOTHROW(encode(nudged));
    }
}

TEST_CASE("repair", "[chromosome]") {
    const GeneLayout L4({4, 4, 4, 4}, Symmetry::Quadrant);

    SECTION("radius genes are sorted") {
        std::vector<double> g{0.7, 0.3, 0.5, 0.2, 0.4, 0.6, 0.8};
        const auto r = repair(Chromosome(L4, g));
        REQUIRE(r.genes[0] == 0.3);
        REQUIRE(r.genes[1] == 0.5);
        REQUIRE(r.genes[2] == 0.7);
    }
    SECTION("valid chromosomes are unchanged") {
        SplitMix64 rng(5);
        const auto c = random_valid(L4, rng);
        REQUIRE(repair(c).genes == c.genes);
    }
    SECTION("near-coincident angles are spread to exactly the minimum gap") {
        const GeneLayout L({8}, Symmetry::Quadrant);  // two sector angles, no radii
        const double a = 0.3, b = 0.3 + 1e-9;
        const auto r = repair(Chromosome(L, {a, b}));
        // direct construction of the expected respacing
        const double center = (a + b) / 2;
        const double base = center - 0.5 * 1e-3;
        REQUIRE(r.genes[0] == base);
        REQUIRE(r.genes[1] == base + 1e-3);
        REQUIRE((r.genes[0] + r.genes[1]) / 2 == Catch::Approx(center).margin(1e-15));
        REQUIRE(r.genes[1] - r.genes[0] == Catch::Approx(1e-3).epsilon(1e-9));
    }
    SECTION("idempotent and total on arbitrary input") {
        SplitMix64 rng(77);
        const GeneLayout L({4, 12, 20, 28}, Symmetry::Vertical);
        for (int t = 0; t < 200; ++t) {
            std::vector<double> g(L.total_genes());
            for (auto& x : g) x = 20.0 * (u01(rng.next()) - 0.5);
            if (t % 17 == 0) g[t % g.size()] = std::nan("");
            const auto r1 = repair(Chromosome(L, g));
            const auto r2 = repair(r1);
            REQUIRE(r2.genes == r1.genes);
            REQUIRE_NOTHROW(decode(r1, identity_mapping({4, 12, 20, 28})));
        }
    }
    SECTION("repaired radii respect bounds and gaps") {
        std::vector<double> g{0.999, 0.9995, 1.7, 0.1, 0.2, 0.3, 0.4};
        const auto r = repair(Chromosome(L4, g));
        REQUIRE(r.genes[0] >= 1e-3);
        REQUIRE(r.genes[2] <= 1.0 - 1e-3);
        REQUIRE(r.genes[1] - r.genes[0] >= 1e-3 - 1e-12);
        REQUIRE(r.genes[2] - r.genes[1] >= 1e-3 - 1e-12);
    }
}
