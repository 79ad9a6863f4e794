#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "apsk/geometry.hpp"
#include "apsk/rng.hpp"

namespace apsk {

/// AM/AM curve constants of the memoryless amplifier model,
/// A(rho) = alpha * rho / (1 + beta * rho^2). AM/PM is not modeled.
struct SalehParams {
    double alpha = 2.1587;
    double beta = 1.1517;
};

enum class HpaMode { Saleh, Ideal };

inline HpaMode hpa_from_string(const std::string& s) {
    if (s == "saleh") return HpaMode::Saleh;
    if (s == "ideal") return HpaMode::Ideal;
    throw config_error("unknown hpa mode: " + s);
}

inline std::string to_string(HpaMode m) {
    return m == HpaMode::Saleh ? "saleh" : "ideal";
}

/// Transmit path parameters. SNR is Es/N0 in dB where Es is the mean
/// squared amplitude of the post-amplifier constellation under a uniform
/// symbol prior; noise is complex Gaussian with per-dimension variance N0/2.
struct ChannelModel {
    HpaMode hpa = HpaMode::Ideal;
    SalehParams saleh{};
    double snr_db = 10.0;
    bool noise_enabled = true;

    static ChannelModel noiseless(HpaMode mode) {
        ChannelModel m;
        m.hpa = mode;
        m.noise_enabled = false;
        return m;
    }

    void validate() const {
        if (!(saleh.alpha > 0.0) || !(saleh.beta > 0.0))
            throw config_error("saleh parameters must be positive");
        if (noise_enabled && !std::isfinite(snr_db))
            throw config_error("snr_db must be finite");
    }
};

inline double saleh_am_am(double rho, const SalehParams& p = {}) {
    if (rho < 0.0) throw std::invalid_argument("amplitude must be non-negative");
    return p.alpha * rho / (1.0 + p.beta * rho * rho);
}

/// Noiseless post-amplifier symbol positions, in symbol order.
inline std::vector<Complex> apply_hpa(const Constellation& c, const ChannelModel& m) {
    std::vector<Complex> out;
    out.reserve(c.size());
    for (int r = 0; r < c.rings(); ++r) {
        const double rho = m.hpa == HpaMode::Saleh
                               ? saleh_am_am(c.radii[r], m.saleh)
                               : c.radii[r];
        for (double a : c.angles[r]) out.emplace_back(rho * std::cos(a), rho * std::sin(a));
    }
    return out;
}

/// Precomputed transmit/receive state for one (constellation, model) pair.
/// The receiver performs ML detection against the post-amplifier points,
/// i.e. it knows the warped constellation.
struct ChannelContext {
    std::vector<Complex> point_of_label;  // indexed by label, size M
    double es = 0.0;                      // mean squared amplitude, post HPA
    double n0 = 0.0;
    double sigma = 0.0;                   // per-dimension noise std dev
    int m = 0;

    ChannelContext(const Constellation& c, const ChannelModel& model) {
        model.validate();
        m = c.size();
        point_of_label.assign(m, {});
        const auto pts = apply_hpa(c, model);
        int flat = 0;
        for (int r = 0; r < c.rings(); ++r)
            for (int s = 0; s < c.layout.counts[r]; ++s, ++flat)
                point_of_label[c.label(r, s)] = pts[flat];
        for (const auto& p : point_of_label) es += std::norm(p);
        es /= m;
        if (model.noise_enabled) {
            n0 = es * std::pow(10.0, -model.snr_db / 10.0);
            sigma = std::sqrt(n0 / 2.0);
        }
    }

    /// Nearest post-HPA point; exact ties go to the smallest label.
    int ml_label(Complex rx) const {
        int best = 0;
        double best_d2 = std::norm(rx - point_of_label[0]);
        for (int lab = 1; lab < m; ++lab) {
            const double d2 = std::norm(rx - point_of_label[lab]);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = lab;
            }
        }
        return best;
    }

    /// Transmitted point for one label with its per-sample noise stream.
    Complex transmit_one(int label, std::uint64_t seed, std::uint64_t index) const {
        Complex p = point_of_label[label];
        if (sigma > 0.0) {
            SplitMix64 g(derive_stream(seed, index));
            const auto z = gauss_pair(g);
            p += Complex(sigma * z.z0, sigma * z.z1);
        }
        return p;
    }
};

/// Modulate, amplify and add AWGN. Deterministic for a given seed: sample i
/// draws from the substream (seed, i), so results are independent of any
/// evaluation sharding.
inline std::vector<Complex> transmit(std::span<const int> labels, const Constellation& c,
                                     const ChannelModel& model, std::uint64_t seed) {
    ChannelContext ctx(c, model);
    std::vector<Complex> out;
    out.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int lab = labels[i];
        if (lab < 0 || lab >= ctx.m)
            throw std::invalid_argument("unknown label: " + std::to_string(lab));
        out.push_back(ctx.transmit_one(lab, seed, i));
    }
    return out;
}

inline int ml_demodulate(Complex rx, const Constellation& c, const ChannelModel& model) {
    return ChannelContext(c, model).ml_label(rx);
}

}  // namespace apsk
