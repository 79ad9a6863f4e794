#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apsk/channel.hpp"
#include "apsk/config.hpp"
#include "apsk/distortion.hpp"
#include "apsk/ga.hpp"
#include "apsk/geometry.hpp"
#include "apsk/image.hpp"

namespace apsk {

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

namespace detail {

inline std::string ring_name(int k, int rings) {
    if (rings == 1) return "Ring 1";
    if (k == 0) return "Inner ring";
    if (k == rings - 1) return "Outer ring";
    return "Ring " + std::to_string(k + 1);
}

inline std::vector<double> default_radii(int rings) {
    std::vector<double> r(rings);
    for (int k = 0; k < rings; ++k) r[k] = static_cast<double>(k + 1) / rings;
    return r;
}

inline Constellation uniform_from_config(const Config& cfg, const std::string& section) {
    const Mapping mapping = load_mapping_file(cfg.resolve_path(cfg.get(section, "mapping")));
    const RingLayout layout = mapping.layout();
    std::vector<double> radii = cfg.find(section, "radii")
                                    ? cfg.get_doubles(section, "radii")
                                    : default_radii(layout.rings());
    const Symmetry sym = cfg.find(section, "symmetry")
                             ? symmetry_from_string(cfg.get(section, "symmetry"))
                             : infer_symmetry(layout);
    return build_uniform(layout, radii, mapping, sym);
}

inline ChannelModel model_from_config(const Config& cfg, const std::string& section) {
    ChannelModel m;
    m.hpa = hpa_from_string(cfg.get_or(section, "hpa", "ideal"));
    m.snr_db = cfg.get_double_or(section, "snr_db", 10.0);
    const auto noise = cfg.get_or(section, "noise", "on");
    if (noise == "off") m.noise_enabled = false;
    else if (noise != "on") throw config_error("noise must be 'on' or 'off'");
    m.validate();
    return m;
}

inline void ensure_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
}

inline std::ofstream open_out(const std::string& path) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw io_error("cannot write output file: " + path);
    return out;
}

inline void provenance(std::ostream& out, const std::string& tool, const Config& cfg,
                       std::uint64_t seed, const ChannelModel* model) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(cfg.hash()));
    out << "# tool: apsk64 " << tool << '\n';
    out << "# config_hash: " << hash << "  seed: " << seed << '\n';
    out << "# snr_convention: Es/N0 in dB, Es = mean squared post-HPA symbol "
           "amplitude (uniform prior), noise per-dimension variance N0/2\n";
    if (model)
        out << "# hpa: " << to_string(model->hpa)
            << "  noise: " << (model->noise_enabled ? "on" : "off") << '\n';
}

inline std::string out_path(const Config& cfg, const std::string& section,
                            const RunOverrides& ov) {
    if (ov.out) return *ov.out;
    return cfg.get(section, "out");
}

}  // namespace detail

/// `analyze-mapping`: intra/inter ring mean label distortion of a mapping
/// laid out on the uniform baseline geometry.
inline MappingTables run_analyze_mapping(const Config& cfg, const RunOverrides& ov = {}) {
    const std::string sec = "analyze-mapping";
    const Constellation c = detail::uniform_from_config(cfg, sec);
    const auto rule_name = cfg.get_or(sec, "neighbor_rule", "directional");
    NeighborRule rule;
    if (rule_name == "directional") rule = NeighborRule::Directional;
    else if (rule_name == "bidirectional") rule = NeighborRule::Bidirectional;
    else throw config_error("neighbor_rule must be directional or bidirectional");

    const MappingTables tables = mapping_tables(c, rule);

    auto out = detail::open_out(detail::out_path(cfg, sec, ov));
    detail::provenance(out, "analyze-mapping", cfg, ov.seed.value_or(0), nullptr);
    out << "# mapping: " << cfg.get(sec, "mapping") << "  neighbor_rule: " << rule_name << '\n';
    out << "kind,rings,mean_distortion\n";
    char buf[64];
    const int R = c.rings();
    for (int k = 0; k < R; ++k) {
        std::snprintf(buf, sizeof buf, "%.10g", tables.intra[k]);
        out << "intra," << detail::ring_name(k, R) << ',' << buf << '\n';
    }
    for (int k = 0; k + 1 < R; ++k) {
        std::snprintf(buf, sizeof buf, "%.10g", tables.inter[k]);
        out << "inter," << detail::ring_name(k + 1, R) << " vs. "
            << detail::ring_name(k, R) << ',' << buf << '\n';
    }
    if (!out) throw io_error("write failed");
    return tables;
}

/// `sweep-snr`: Monte Carlo MSE for each grid point.
inline std::vector<DistortionReport> run_sweep_snr(const Config& cfg,
                                                   const RunOverrides& ov = {}) {
    const std::string sec = "sweep-snr";
    const Constellation c = detail::uniform_from_config(cfg, sec);
    ChannelModel model = detail::model_from_config(cfg, sec);
    const auto grid = cfg.get_doubles(sec, "snr_grid");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw config_error("snr_grid must be sorted ascending");
    const auto samples =
        static_cast<std::uint64_t>(cfg.get_int_or(sec, "samples", 1000000));
    const std::uint64_t seed = ov.seed.value_or(cfg.get_u64_or(sec, "seed", 0));
    const int workers = static_cast<int>(cfg.get_int_or(sec, "workers", 1));

    std::vector<DistortionReport> reports;
    for (double snr : grid) {
        model.snr_db = snr;
        reports.push_back(estimate_mse(c, model, samples, seed, workers));
    }

    auto out = detail::open_out(detail::out_path(cfg, sec, ov));
    detail::provenance(out, "sweep-snr", cfg, seed, &model);
    out << "snr_db,mse,rms,half_width_95,n_samples\n";
    char buf[160];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& r = reports[i];
        std::snprintf(buf, sizeof buf, "%g,%.10g,%.10g,%.10g,%llu\n", grid[i], r.mse,
                      r.rms, r.half_width_95,
                      static_cast<unsigned long long>(r.n_samples));
        out << buf;
    }
    if (!out) throw io_error("write failed");
    return reports;
}

struct OptimizeResult {
    GaTrace trace;
    Constellation best;
    double baseline_mse = 0.0;
    double optimized_mse = 0.0;
    double reduction_pct = 0.0;
};

/// `optimize`: GA search for the constellation minimizing MSE under the
/// configured mapping and symmetry class; reports the reduction against
/// the uniform baseline, measured with an independent evaluation seed.
inline OptimizeResult run_optimize(const Config& cfg, const RunOverrides& ov = {},
                                   std::ostream* summary = nullptr) {
    const std::string sec = "optimize";
    const Constellation baseline = detail::uniform_from_config(cfg, sec);
    const ChannelModel model = detail::model_from_config(cfg, sec);

    GaConfig ga;
    ga.seed = ov.seed.value_or(cfg.get_u64_or(sec, "seed", 0));
    ga.population = static_cast<int>(cfg.get_int_or(sec, "population", ga.population));
    ga.max_generations =
        static_cast<int>(cfg.get_int_or(sec, "max_generations", ga.max_generations));
    ga.p_mut = cfg.get_double_or(sec, "p_mut", ga.p_mut);
    ga.p_cross = cfg.get_double_or(sec, "p_cross", ga.p_cross);
    ga.gene_vary_fraction = cfg.get_double_or(sec, "gene_vary_fraction", ga.gene_vary_fraction);
    ga.elite_fraction_cap = cfg.get_double_or(sec, "elite_fraction_cap", ga.elite_fraction_cap);
    ga.tournament_size =
        static_cast<int>(cfg.get_int_or(sec, "tournament_size", ga.tournament_size));
    ga.mutation_sigma = cfg.get_double_or(sec, "mutation_sigma", ga.mutation_sigma);
    ga.convergence_epsilon =
        cfg.get_double_or(sec, "convergence_epsilon", ga.convergence_epsilon);
    ga.convergence_patience = static_cast<int>(
        cfg.get_int_or(sec, "convergence_patience", ga.convergence_patience));
    ga.fitness_samples =
        static_cast<std::uint64_t>(cfg.get_int_or(sec, "samples", 100000));
    ga.validate();

    const int workers = static_cast<int>(cfg.get_int_or(sec, "workers", 1));
    const auto report_samples =
        static_cast<std::uint64_t>(cfg.get_int_or(sec, "report_samples", 1000000));

    ApskMseProblem problem;
    problem.layout = GeneLayout(baseline.layout, baseline.symmetry);
    problem.mapping = baseline.mapping;
    problem.model = model;
    problem.fitness_samples = ga.fitness_samples;
    problem.mse_seed = derive_stream(ga.seed, 0x4d43'5345'4544'0001ULL);

    OptimizeResult res;
    res.trace = optimize(problem, ga, workers);
    res.best = decode(Chromosome(problem.layout, res.trace.best().best_genes),
                      baseline.mapping);

    const std::uint64_t report_seed = derive_stream(ga.seed, 0x5245'504f'5254'0001ULL);
    res.baseline_mse =
        estimate_mse(baseline, model, report_samples, report_seed, workers).mse;
    res.optimized_mse =
        estimate_mse(res.best, model, report_samples, report_seed, workers).mse;
    res.reduction_pct = 100.0 * (res.baseline_mse - res.optimized_mse) / res.baseline_mse;

    const std::string trace_path = detail::out_path(cfg, sec, ov);
    {
        auto out = detail::open_out(trace_path);
        detail::provenance(out, "optimize", cfg, ga.seed, &model);
        out << "generation,best_mse,mean_mse,best_fitness\n";
        res.trace.write_rows(out);
        if (!out) throw io_error("write failed");
    }
    if (const auto cpath = cfg.find(sec, "out_constellation")) {
        detail::ensure_parent_dir(*cpath);
        std::ostringstream header;
        detail::provenance(header, "optimize", cfg, ga.seed, &model);
        std::string h = header.str();
        std::string stripped;  // save_constellation adds its own '#'
        for (std::istringstream hs(h); std::getline(hs, h);)
            stripped += h.substr(2) + "\n";
        save_constellation_file(res.best, *cpath, stripped);
    }
    if (summary) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "baseline_mse=%.4f optimized_mse=%.4f reduction=%.1f%% "
                      "generations=%zu%s\n",
                      res.baseline_mse, res.optimized_mse, res.reduction_pct,
                      res.trace.generations.size() - 1,
                      res.trace.converged ? " (converged)" : "");
        *summary << buf;
    }
    return res;
}

struct ImageRunResult {
    std::string name;
    ImageScore score;
};

/// `transmit-image`: run the payload pipeline for every listed
/// constellation. Entries are either a constellation file path or
/// "uniform <mapping-path>" for the uniform baseline of that mapping.
inline std::vector<ImageRunResult> run_transmit_image(const Config& cfg,
                                                      const RunOverrides& ov = {}) {
    const std::string sec = "transmit-image";
    const GreyImage img = read_pgm_file(cfg.resolve_path(cfg.get(sec, "image")));
    const ChannelModel model = detail::model_from_config(cfg, sec);
    const std::uint64_t seed = ov.seed.value_or(cfg.get_u64_or(sec, "seed", 0));

    const auto entries = cfg.get_all(sec, "constellation");
    if (entries.empty()) throw config_error("no constellation entries");

    std::vector<ImageRunResult> results;
    for (const auto& entry : entries) {
        Constellation c;
        std::string name;
        if (entry.rfind("uniform ", 0) == 0) {
            std::string mpath = entry.substr(8);
            const Mapping mapping = load_mapping_file(cfg.resolve_path(mpath));
            const RingLayout layout = mapping.layout();
            std::vector<double> radii = cfg.find(sec, "radii")
                                            ? cfg.get_doubles(sec, "radii")
                                            : detail::default_radii(layout.rings());
            c = build_uniform(layout, radii, mapping, infer_symmetry(layout));
            const auto slash = mpath.find_last_of('/');
            name = "uniform-" + mpath.substr(slash == std::string::npos ? 0 : slash + 1);
        } else {
            c = load_constellation_file(cfg.resolve_path(entry));
            const auto slash = entry.find_last_of('/');
            name = entry.substr(slash == std::string::npos ? 0 : slash + 1);
        }
        results.push_back({std::move(name), transmit_image(img, c, model, seed)});
    }

    const std::string csv_path = detail::out_path(cfg, sec, ov);
    auto out = detail::open_out(csv_path);
    detail::provenance(out, "transmit-image", cfg, seed, &model);
    out << "constellation,snr_db,psnr_db,pixel_mse,label_mse\n";
    const std::string prefix = csv_path.size() > 4 && csv_path.ends_with(".csv")
                                   ? csv_path.substr(0, csv_path.size() - 4)
                                   : csv_path;
    char buf[256];
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::snprintf(buf, sizeof buf, "%s,%g,%.6g,%.10g,%.10g\n", r.name.c_str(),
                      model.snr_db, r.score.psnr_db, r.score.pixel_mse,
                      r.score.label_mse);
        out << buf;
        write_pgm_file(r.score.received,
                       prefix + "_" + std::to_string(i) + "_" + r.name + ".pgm");
    }
    if (!out) throw io_error("write failed");
    return results;
}

}  // namespace apsk
