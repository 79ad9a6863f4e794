#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "apsk/channel.hpp"
#include "apsk/geometry.hpp"

namespace apsk {

/// Distortion between transmitted and decoded labels: absolute difference
/// of their 6-bit integer values, so errors in high bits cost more.
inline int label_distortion(int sent, int decoded) {
    if (sent < 0 || sent > 63 || decoded < 0 || decoded > 63)
        throw std::invalid_argument("label outside 0..63");
    return std::abs(sent - decoded);
}

struct DistortionReport {
    double mse = 0.0;            // mean squared label distortion
    double rms = 0.0;            // sqrt(mse)
    double half_width_95 = 0.0;  // 95% confidence half-width on mse
    std::uint64_t n_samples = 0;
};

/// Monte Carlo estimate of E[d^2] over `n_symbols` uniform random labels.
/// Sample i uses the substream (seed, i) and partial sums are reduced in
/// fixed block order, so the result is bit-identical for any worker count.
inline DistortionReport estimate_mse(const Constellation& c, const ChannelModel& model,
                                     std::uint64_t n_symbols, std::uint64_t seed,
                                     int workers = 1) {
    if (n_symbols < 1) throw std::invalid_argument("need at least one symbol");
    const ChannelContext ctx(c, model);

    constexpr std::uint64_t block = 1u << 16;
    const std::uint64_t n_blocks = (n_symbols + block - 1) / block;
    std::vector<std::pair<double, double>> partial(n_blocks, {0.0, 0.0});

    auto run_block = [&](std::uint64_t b) {
        const std::uint64_t begin = b * block;
        const std::uint64_t end = std::min(n_symbols, begin + block);
        double s2 = 0.0, s4 = 0.0;
        for (std::uint64_t i = begin; i < end; ++i) {
            SplitMix64 g(derive_stream(seed, i));
            const int sent = static_cast<int>(uniform_index(g, ctx.m));
            Complex rx = ctx.point_of_label[sent];
            if (ctx.sigma > 0.0) {
                const auto z = gauss_pair(g);
                rx += Complex(ctx.sigma * z.z0, ctx.sigma * z.z1);
            }
            const double d = std::abs(sent - ctx.ml_label(rx));
            const double d2 = d * d;
            s2 += d2;
            s4 += d2 * d2;
        }
        partial[b] = {s2, s4};
    };

    const int nw = static_cast<int>(std::min<std::uint64_t>(std::max(workers, 1), n_blocks));
    if (nw <= 1) {
        for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nw);
        for (int w = 0; w < nw; ++w)
            pool.emplace_back([&] {
                for (std::uint64_t b; (b = next.fetch_add(1)) < n_blocks;) run_block(b);
            });
        for (auto& t : pool) t.join();
    }

    double sum_d2 = 0.0, sum_d4 = 0.0;
    for (const auto& [s2, s4] : partial) {
        sum_d2 += s2;
        sum_d4 += s4;
    }

    DistortionReport rep;
    rep.n_samples = n_symbols;
    rep.mse = sum_d2 / static_cast<double>(n_symbols);
    rep.rms = std::sqrt(rep.mse);
    if (n_symbols > 1) {
        const double n = static_cast<double>(n_symbols);
        const double var = std::max(0.0, (sum_d4 - n * rep.mse * rep.mse) / (n - 1.0));
        rep.half_width_95 = 1.96 * std::sqrt(var / n);
    }
    return rep;
}

namespace detail {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// Tensor Gauss-Legendre panels of order 2 and 3 on one cell; their
/// difference drives the refinement.
template <typename F>
QuadResult cell_estimates(F&& f, double x0, double x1, double y0, double y1) {
    constexpr double g2 = 0.5773502691896257;  // 1/sqrt(3)
    constexpr double g3 = 0.7745966692414834;  // sqrt(3/5)
    const double cx = 0.5 * (x0 + x1), hx = 0.5 * (x1 - x0);
    const double cy = 0.5 * (y0 + y1), hy = 0.5 * (y1 - y0);

    double q2 = 0.0;
    for (double sx : {-g2, g2})
        for (double sy : {-g2, g2}) q2 += f(cx + sx * hx, cy + sy * hy);
    q2 *= hx * hy;

    const double n3[3] = {-g3, 0.0, g3};
    const double w3[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double q3 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            q3 += w3[i] * w3[j] * f(cx + n3[i] * hx, cy + n3[j] * hy);
    q3 *= hx * hy;

    return {q3, std::abs(q3 - q2)};
}

template <typename F>
void adaptive_quad(F&& f, double x0, double x1, double y0, double y1, double tol,
                   double min_cell, int depth, QuadResult& acc) {
    const auto est = cell_estimates(f, x0, x1, y0, y1);
    const bool small_enough = (x1 - x0) <= min_cell;
    if ((small_enough && est.error <= std::max(tol, 3e-10)) || depth >= 20) {
        acc.value += est.value;
        acc.error += est.error;
        return;
    }
    const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
    const double t = tol * 0.25;
    adaptive_quad(f, x0, xm, y0, ym, t, min_cell, depth + 1, acc);
    adaptive_quad(f, xm, x1, y0, ym, t, min_cell, depth + 1, acc);
    adaptive_quad(f, x0, xm, ym, y1, t, min_cell, depth + 1, acc);
    adaptive_quad(f, xm, x1, ym, y1, t, min_cell, depth + 1, acc);
}

}  // namespace detail

/// Exact E[d^2] for small alphabets (M <= 16): integrates the noise density
/// over the ML decision regions (nearest post-HPA point, evaluated on an
/// adaptive grid) to absolute accuracy ~1e-4. half_width_95 reports the
/// accumulated quadrature error bound.
inline DistortionReport exact_mse(const Constellation& c, const ChannelModel& model) {
    if (c.size() > 16)
        throw std::invalid_argument("exact_mse supports at most 16 symbols");
    const ChannelContext ctx(c, model);

    DistortionReport rep;
    rep.n_samples = 0;
    if (ctx.sigma == 0.0) return rep;  // noiseless: ML returns the sent label

    const double sigma = ctx.sigma;
    const double inv_norm = 1.0 / (two_pi * sigma * sigma);
    const double span = 8.5 * sigma;
    const double tail_mass = std::erfc(8.5 / std::sqrt(2.0));  // per side, per axis
    const double truncation = 63.0 * 63.0 * 4.0 * tail_mass;

    double total = 0.0, err = 0.0;
    for (int sent = 0; sent < ctx.m; ++sent) {
        const Complex p = ctx.point_of_label[sent];
        auto integrand = [&](double x, double y) {
            const int dec = ctx.ml_label({x, y});
            if (dec == sent) return 0.0;
            const double dx = x - p.real(), dy = y - p.imag();
            const double d = std::abs(sent - dec);
            return inv_norm * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) * d * d;
        };
        detail::QuadResult acc;
        detail::adaptive_quad(integrand, p.real() - span, p.real() + span,
                              p.imag() - span, p.imag() + span,
                              5e-5, sigma, 0, acc);
        total += acc.value;
        err += acc.error;
    }
    rep.mse = total / ctx.m;
    rep.rms = std::sqrt(rep.mse);
    rep.half_width_95 = err / ctx.m + truncation;
    return rep;
}

/// Mean label distortion between angularly adjacent symbols on the same
/// ring (intra) and between neighbours on adjacent rings (inter).
struct MappingTables {
    std::vector<double> intra;  // per ring, innermost first
    std::vector<double> inter;  // per adjacent pair (ring k vs ring k+1)
};

/// Neighbour pairing for the inter-ring figures. Directional: every symbol
/// on the outer ring of the pair is matched to its angularly nearest
/// symbol on the inner ring. Bidirectional additionally matches each inner
/// symbol to its nearest outer symbol and averages over all pairings.
enum class NeighborRule { Directional, Bidirectional };

inline MappingTables mapping_tables(const Constellation& c,
                                    NeighborRule rule = NeighborRule::Directional) {
    c.validate();
    struct Sym {
        double angle;
        int label;
    };
    std::vector<std::vector<Sym>> rings(c.rings());
    for (int r = 0; r < c.rings(); ++r) {
        for (int s = 0; s < c.layout.counts[r]; ++s)
            rings[r].push_back({canonical_angle(c.angles[r][s], Symmetry::None),
                                c.label(r, s)});
        std::sort(rings[r].begin(), rings[r].end(),
                  [](const Sym& a, const Sym& b) { return a.angle < b.angle; });
    }

    MappingTables t;
    for (const auto& ring : rings) {
        const std::size_t n = ring.size();
        if (n <= 1) {
            t.intra.push_back(0.0);
        } else if (n == 2) {
            t.intra.push_back(std::abs(ring[0].label - ring[1].label));
        } else {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                sum += std::abs(ring[j].label - ring[(j + 1) % n].label);
            t.intra.push_back(sum / static_cast<double>(n));
        }
    }

    auto nearest = [](const Sym& s, const std::vector<Sym>& other) {
        const Sym* best = &other.front();
        double best_d = angular_distance(s.angle, best->angle);
        for (const auto& o : other) {
            const double d = angular_distance(s.angle, o.angle);
            if (d < best_d) {
                best_d = d;
                best = &o;
            }
        }
        return best->label;
    };
    for (int r = 0; r + 1 < c.rings(); ++r) {
        double sum = 0.0;
        std::size_t count = rings[r + 1].size();
        for (const auto& s : rings[r + 1]) sum += std::abs(s.label - nearest(s, rings[r]));
        if (rule == NeighborRule::Bidirectional) {
            for (const auto& s : rings[r]) sum += std::abs(s.label - nearest(s, rings[r + 1]));
            count += rings[r].size();
        }
        t.inter.push_back(sum / static_cast<double>(count));
    }
    return t;
}

}  // namespace apsk
