#pragma once

// Multi-restart fitting and the synthetic benchmark grid.

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nigmix/datagen.hpp"
#include "nigmix/engine.hpp"
#include "nigmix/eval.hpp"
#include "nigmix/parallel.hpp"

namespace nigmix {

struct RestartOutcome {
    RunRecord record;
    std::optional<FitResult> result;  ///< empty when the fit broke down
    std::string error;
};

/// Fits `restarts` times with seeds fconfig.seed, fconfig.seed + 1, ...
/// A restart that throws NumericalBreakdown or DegenerateFit is kept with
/// elbo = -inf and its message, so it never wins best-run selection.
inline std::vector<RestartOutcome> fit_restarts(const ObservationSet& data, const PriorConfig& pconfig,
                                                const FitConfig& fconfig, std::size_t restarts,
                                                const std::vector<int>* truth, const std::string& dataset,
                                                std::size_t threads = 1, bool timing = false) {
    std::vector<RestartOutcome> out(restarts);
    parallel_for(restarts, threads, [&](std::size_t r) {
        FitConfig fc = fconfig;
        fc.seed = fconfig.seed + r;
        RestartOutcome& o = out[r];
        o.record.dataset = dataset;
        o.record.variant = fc.variant;
        o.record.concentration = fc.concentration;
        o.record.seed = fc.seed;
        const auto start = std::chrono::steady_clock::now();
        try {
            FitResult res = fit(data, pconfig, fc);
            o.record.elbo = res.final_elbo();
            o.record.n_clusters = res.n_clusters;
            o.record.iterations = res.iterations;
            o.record.ari = truth ? adjusted_rand_index(res.labels, *truth) : std::numeric_limits<double>::quiet_NaN();
            o.result = std::move(res);
        } catch (const NumericalBreakdown& e) {
            o.error = e.what();
        } catch (const DegenerateFit& e) {
            o.error = e.what();
        }
        if (!o.result) {
            o.record.elbo = -std::numeric_limits<double>::infinity();
            o.record.ari = std::numeric_limits<double>::quiet_NaN();
        }
        if (timing) o.record.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });
    return out;
}

/// Index of the best restart (largest ELBO, lowest seed on ties).
inline std::size_t best_restart(const std::vector<RestartOutcome>& outcomes) {
    std::vector<RunRecord> records;
    for (const auto& o : outcomes) records.push_back(o.record);
    const RunRecord& best = select_best_run(records);
    return static_cast<std::size_t>(&best - records.data());
}

struct BenchGrid {
    std::vector<double> lambda_stars{0.1, 1.0, 10.0};
    std::vector<double> sigma_betas{0.0, 0.5};
    std::vector<Variant> variants{Variant::gmm, Variant::trun, Variant::gam, Variant::invg};
    std::vector<Concentration> concentrations{Concentration::dd, Concentration::dpm};
    std::size_t datasets = 3;  ///< datasets per (lambda*, sigma_beta) cell
    std::size_t restarts = 10;
    GenConfig gen;       ///< lambda_star, sigma_beta and seed are overridden per dataset
    PriorConfig prior;
    FitConfig fit;       ///< variant, concentration and seed are overridden per run
};

struct BenchRow {
    double lambda_star = 0.0;
    double sigma_beta = 0.0;
    std::size_t dataset_index = 0;
    std::uint64_t dataset_seed = 0;
    RunRecord record;
    bool best = false;
    std::string error;
};

inline std::string bench_dataset_id(double lambda_star, double sigma_beta, std::size_t index) {
    std::ostringstream id;
    id << "ls" << lambda_star << "_sb" << sigma_beta << "_d" << index;
    return id.str();
}

/// Dataset seeds are gen.seed + running dataset number; restart seeds are
/// fit.seed + restart number. Rows come out in grid order whatever the
/// worker count.
inline std::vector<BenchRow> run_bench(const BenchGrid& grid, std::size_t threads = 1, bool timing = false) {
    struct Cell {
        double lambda_star;
        double sigma_beta;
        std::size_t index;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    std::uint64_t counter = 0;
    for (double ls : grid.lambda_stars) {
        for (double sb : grid.sigma_betas) {
            for (std::size_t d = 0; d < grid.datasets; ++d) cells.push_back({ls, sb, d, grid.gen.seed + counter++});
        }
    }
    const std::size_t per_dataset = grid.variants.size() * grid.concentrations.size();
    const std::size_t jobs = cells.size() * per_dataset * grid.restarts;
    std::vector<LabeledDataset> data(cells.size());
    std::vector<ObservationSet> obs(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t c) {
        GenConfig g = grid.gen;
        g.lambda_star = cells[c].lambda_star;
        g.sigma_beta = cells[c].sigma_beta;
        g.seed = cells[c].seed;
        data[c] = generate(g);
        obs[c] = ObservationSet::from_matrix(data[c].data);
    });

    std::vector<BenchRow> rows(jobs);
    parallel_for(jobs, threads, [&](std::size_t job) {
        const std::size_t r = job % grid.restarts;
        const std::size_t combo = (job / grid.restarts) % per_dataset;
        const std::size_t c = job / (grid.restarts * per_dataset);
        FitConfig fc = grid.fit;
        fc.variant = grid.variants[combo / grid.concentrations.size()];
        fc.concentration = grid.concentrations[combo % grid.concentrations.size()];
        fc.seed = grid.fit.seed + r;
        const std::string id = bench_dataset_id(cells[c].lambda_star, cells[c].sigma_beta, cells[c].index);
        auto outcome = fit_restarts(obs[c], grid.prior, fc, 1, &data[c].labels, id, 1, timing);
        BenchRow& row = rows[job];
        row.lambda_star = cells[c].lambda_star;
        row.sigma_beta = cells[c].sigma_beta;
        row.dataset_index = cells[c].index;
        row.dataset_seed = cells[c].seed;
        row.record = outcome[0].record;
        row.error = outcome[0].error;
    });
    for (std::size_t start = 0; start < jobs; start += grid.restarts) {
        std::vector<RunRecord> group;
        for (std::size_t r = 0; r < grid.restarts; ++r) group.push_back(rows[start + r].record);
        const RunRecord& best = select_best_run(group);
        rows[start + static_cast<std::size_t>(&best - group.data())].best = true;
    }
    return rows;
}

}  // namespace nigmix
