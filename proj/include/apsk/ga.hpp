#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>
#include <vector>

#include "apsk/chromosome.hpp"
#include "apsk/distortion.hpp"
#include "apsk/rng.hpp"

namespace apsk {

struct GaConfig {
    int population = 100;
    double p_mut = 0.3;
    double p_cross = 0.5;
    double gene_vary_fraction = 0.10;   // fraction of genes a mutation may touch
    double elite_fraction_cap = 0.40;   // max fraction of parents carried over
    int max_generations = 200;
    int tournament_size = 2;
    std::uint64_t fitness_samples = 100000;
    std::uint64_t seed = 0;
    double convergence_epsilon = 1e-6;  // relative fitness spread
    int convergence_patience = 10;
    double mutation_sigma = 0.05;       // amplitude units / radians

    void validate() const {
        if (population < 4 || population % 2 != 0)
            throw config_error("population must be even and >= 4");
        for (double p : {p_mut, p_cross})
            if (!(p >= 0.0 && p <= 1.0))
                throw config_error("probabilities must lie in [0, 1]");
        for (double f : {gene_vary_fraction, elite_fraction_cap})
            if (!(f > 0.0 && f <= 1.0))
                throw config_error("fractions must lie in (0, 1]");
        if (max_generations < 0) throw config_error("max_generations must be >= 0");
        if (tournament_size < 1 || tournament_size > population)
            throw config_error("tournament size must lie in 1..population");
        if (fitness_samples < 1) throw config_error("fitness_samples must be >= 1");
        if (convergence_patience < 1) throw config_error("convergence_patience must be >= 1");
        if (!(convergence_epsilon >= 0.0)) throw config_error("convergence_epsilon must be >= 0");
        if (!(mutation_sigma > 0.0)) throw config_error("mutation_sigma must be > 0");
    }
};

/// Draw `k` distinct members uniformly and return the index of the fittest;
/// ties go to the lower index.
inline std::size_t tournament_select_index(const std::vector<double>& scores, int k,
                                           SplitMix64& rng) {
    const std::size_t n = scores.size();
    if (n == 0) throw std::invalid_argument("empty population");
    if (k < 1 || static_cast<std::size_t>(k) > n)
        throw std::invalid_argument("tournament size exceeds population");
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::size_t best = n;
    for (int i = 0; i < k; ++i) {
        const std::uint32_t j = i + uniform_index(rng, static_cast<std::uint32_t>(n - i));
        std::swap(idx[i], idx[j]);
        const std::size_t cand = idx[i];
        if (best == n || scores[cand] > scores[best] ||
            (scores[cand] == scores[best] && cand < best))
            best = cand;
    }
    return best;
}

/// Children swap the gene span [i, j).
inline std::pair<std::vector<double>, std::vector<double>> two_point_crossover_at(
    const std::vector<double>& a, const std::vector<double>& b,
    std::size_t i, std::size_t j) {
    if (a.size() != b.size()) throw std::invalid_argument("gene length mismatch");
    auto c1 = a, c2 = b;
    for (std::size_t g = i; g < j && g < a.size(); ++g) std::swap(c1[g], c2[g]);
    return {std::move(c1), std::move(c2)};
}

inline std::pair<std::size_t, std::size_t> draw_cut_points(std::size_t len, SplitMix64& rng) {
    std::size_t i = uniform_index(rng, static_cast<std::uint32_t>(len + 1));
    std::size_t j = uniform_index(rng, static_cast<std::uint32_t>(len + 1));
    if (i > j) std::swap(i, j);
    return {i, j};
}

inline std::pair<Chromosome, Chromosome> two_point_crossover(const Chromosome& a,
                                                             const Chromosome& b,
                                                             SplitMix64& rng) {
    if (a.genes.size() != b.genes.size())
        throw std::invalid_argument("gene length mismatch");
    const auto [i, j] = draw_cut_points(a.genes.size(), rng);
    auto [g1, g2] = two_point_crossover_at(a.genes, b.genes, i, j);
    return {repair(Chromosome(a.layout, std::move(g1))),
            repair(Chromosome(b.layout, std::move(g2)))};
}

/// With probability p_mut, perturb ceil(gene_vary_fraction * len) distinct
/// gene positions with Gaussian noise of sigma mutation_sigma; otherwise
/// return the genes unchanged. No repair here.
inline std::vector<double> mutate_genes(std::vector<double> genes, SplitMix64& rng,
                                        const GaConfig& cfg) {
    if (!(u01(rng.next()) < cfg.p_mut)) return genes;
    const std::size_t len = genes.size();
    const auto n_mut = static_cast<std::size_t>(
        std::ceil(cfg.gene_vary_fraction * static_cast<double>(len)));
    std::vector<std::uint32_t> idx(len);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < n_mut && i < len; ++i) {
        const std::uint32_t j = i + uniform_index(rng, static_cast<std::uint32_t>(len - i));
        std::swap(idx[i], idx[j]);
        genes[idx[i]] += gaussian(rng, cfg.mutation_sigma);
    }
    return genes;
}

inline Chromosome mutate(const Chromosome& c, SplitMix64& rng, const GaConfig& cfg) {
    return repair(Chromosome(c.layout, mutate_genes(c.genes, rng, cfg)));
}

struct Individual {
    std::vector<double> genes;
    double fitness = 0.0;
};

using Population = std::vector<Individual>;

template <typename P>
concept GaProblem = requires(const P p, SplitMix64& rng, const std::vector<double>& g) {
    { p.random_genes(rng) } -> std::convertible_to<std::vector<double>>;
    { p.repair(g) } -> std::convertible_to<std::vector<double>>;
    { p.fitness(g) } -> std::convertible_to<double>;
};

namespace detail {

template <GaProblem P>
void evaluate_range(Population& pop, std::size_t begin, const P& problem, int workers) {
    const std::size_t n = pop.size() - begin;
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = begin; i < pop.size(); ++i)
            pop[i].fitness = problem.fitness(pop[i].genes);
        return;
    }
    std::atomic<std::size_t> next{begin};
    std::vector<std::thread> pool;
    const int nw = static_cast<int>(std::min<std::size_t>(workers, n));
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < pop.size();)
                pop[i].fitness = problem.fitness(pop[i].genes);
        });
    for (auto& t : pool) t.join();
}

inline std::vector<std::size_t> rank_by_fitness(const Population& pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pop[a].fitness > pop[b].fitness;
    });
    return order;
}

}  // namespace detail

/// One generation: rank, carry elites (at most ceil(cap * population)),
/// fill the remainder with crossover + mutation offspring of
/// tournament-selected parents, evaluate the new members. All random draws
/// happen on the master stream before evaluation, so worker count never
/// changes the result. Returns the number of elites carried over.
template <GaProblem P>
int step_generation(Population& pop, const P& problem, const GaConfig& cfg,
                    SplitMix64& rng, int workers = 1) {
    const std::size_t n = pop.size();
    const auto order = detail::rank_by_fitness(pop);
    const auto n_elite = std::min<std::size_t>(
        static_cast<std::size_t>(std::ceil(cfg.elite_fraction_cap * static_cast<double>(n))), n);

    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = pop[i].fitness;

    Population next;
    next.reserve(n);
    for (std::size_t e = 0; e < n_elite; ++e) next.push_back(pop[order[e]]);

    while (next.size() < n) {
        const auto pa = tournament_select_index(scores, cfg.tournament_size, rng);
        const auto pb = tournament_select_index(scores, cfg.tournament_size, rng);
        std::vector<double> g1 = pop[pa].genes;
        std::vector<double> g2 = pop[pb].genes;
        if (u01(rng.next()) < cfg.p_cross) {
            const auto [i, j] = draw_cut_points(g1.size(), rng);
            std::tie(g1, g2) = two_point_crossover_at(g1, g2, i, j);
        }
        g1 = problem.repair(mutate_genes(std::move(g1), rng, cfg));
        g2 = problem.repair(mutate_genes(std::move(g2), rng, cfg));
        next.push_back({std::move(g1), 0.0});
        if (next.size() < n) next.push_back({std::move(g2), 0.0});
    }
    detail::evaluate_range(next, n_elite, problem, workers);
    pop = std::move(next);
    return static_cast<int>(n_elite);
}

struct GaGeneration {
    int generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    double best_mse = 0.0;  // 1 / best_fitness
    double mean_mse = 0.0;  // population mean of 1 / fitness
    int elite_count = 0;
    std::vector<double> best_genes;
};

struct GaTrace {
    std::vector<GaGeneration> generations;
    bool converged = false;

    const GaGeneration& best() const { return generations.back(); }

    /// Data rows only; higher layers prepend provenance headers.
    void write_rows(std::ostream& out) const {
        char buf[128];
        for (const auto& g : generations) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", g.generation,
                          g.best_mse, g.mean_mse, g.best_fitness);
            out << buf;
        }
    }
};

namespace detail {

inline GaGeneration record_generation(const Population& pop, int gen, int elites) {
    GaGeneration row;
    row.generation = gen;
    row.elite_count = elites;
    std::size_t best = 0;
    double sum_f = 0.0, sum_m = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        sum_f += pop[i].fitness;
        sum_m += pop[i].fitness > 0.0 ? 1.0 / pop[i].fitness
                                      : std::numeric_limits<double>::infinity();
        if (pop[i].fitness > pop[best].fitness) best = i;
    }
    row.best_fitness = pop[best].fitness;
    row.best_mse = row.best_fitness > 0.0 ? 1.0 / row.best_fitness
                                          : std::numeric_limits<double>::infinity();
    row.mean_fitness = sum_f / static_cast<double>(pop.size());
    row.mean_mse = sum_m / static_cast<double>(pop.size());
    row.best_genes = pop[best].genes;
    return row;
}

inline bool fitness_converged(const Population& pop, double epsilon) {
    double lo = pop.front().fitness, hi = lo;
    for (const auto& ind : pop) {
        lo = std::min(lo, ind.fitness);
        hi = std::max(hi, ind.fitness);
    }
    return hi > 0.0 && (hi - lo) / hi < epsilon;
}

}  // namespace detail

/// Full run: evaluate a random initial population, then step generations
/// until the population fitness spread stays below convergence_epsilon for
/// convergence_patience consecutive generations or max_generations is
/// reached. Reproducible: the trace depends only on (config, problem seed),
/// never on the worker count.
template <GaProblem P>
GaTrace optimize(const P& problem, const GaConfig& cfg, int workers = 1) {
    cfg.validate();
    SplitMix64 rng(derive_stream(cfg.seed, 0x6741'7275'6e00'0001ULL));

    Population pop;
    pop.reserve(cfg.population);
    for (int i = 0; i < cfg.population; ++i) pop.push_back({problem.random_genes(rng), 0.0});
    detail::evaluate_range(pop, 0, problem, workers);

    GaTrace trace;
    trace.generations.push_back(detail::record_generation(pop, 0, 0));

    int streak = detail::fitness_converged(pop, cfg.convergence_epsilon) ? 1 : 0;
    for (int gen = 1; gen <= cfg.max_generations; ++gen) {
        const int elites = step_generation(pop, problem, cfg, rng, workers);
        trace.generations.push_back(detail::record_generation(pop, gen, elites));
        streak = detail::fitness_converged(pop, cfg.convergence_epsilon) ? streak + 1 : 0;
        if (streak >= cfg.convergence_patience) {
            trace.converged = true;
            break;
        }
    }
    return trace;
}

/// MSE-minimizing constellation design problem. The Monte Carlo seed is
/// frozen per run, so fitness is a deterministic function of the genes;
/// that keeps elitism exactly monotone and makes convergence well-defined.
struct ApskMseProblem {
    GeneLayout layout;
    Mapping mapping;
    ChannelModel model;
    std::uint64_t fitness_samples = 100000;
    std::uint64_t mse_seed = 0;
    double mse_floor = 1e-9;

    std::vector<double> random_genes(SplitMix64& rng) const {
        std::vector<double> g(layout.total_genes());
        const int nr = layout.radius_genes();
        for (int i = 0; i < nr; ++i) g[i] = u01(rng.next());
        std::sort(g.begin(), g.begin() + nr);
        const double lo = layout.sector_lo();
        const double w = layout.sector_width();
        for (int i = nr; i < layout.total_genes(); ++i)
            g[i] = uniform_real(rng, lo, lo + w);
        return apsk::repair(Chromosome(layout, std::move(g))).genes;
    }

    std::vector<double> repair(const std::vector<double>& g) const {
        return apsk::repair(Chromosome(layout, g)).genes;
    }

    double mse(const std::vector<double>& g) const {
        const Constellation c = decode(Chromosome(layout, g), mapping);
        return estimate_mse(c, model, fitness_samples, mse_seed).mse;
    }

    double fitness(const std::vector<double>& g) const {
        return 1.0 / std::max(mse(g), mse_floor);
    }
};

inline double evaluate_fitness(const Chromosome& c, const ApskMseProblem& problem) {
    return problem.fitness(c.genes);
}

}  // namespace apsk
