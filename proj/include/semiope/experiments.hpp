#pragma once

#include <functional>
#include <string>
#include <vector>

#include "semiope/annotation.hpp"
#include "semiope/environments.hpp"
#include "semiope/estimators.hpp"
#include "semiope/metrics.hpp"
#include "semiope/sepsis.hpp"
#include "semiope/theory.hpp"

namespace semiope {

// jobs <= 0 resolves SEMI_OPE_JOBS, then the hardware thread count
int resolve_jobs(int jobs);

// runs fn(i) for i in [0, n); results must be written to per-index slots so
// output does not depend on scheduling
void parallel_for(int64_t n, int jobs, const std::function<void(int64_t)>& fn);
void serial_for(int64_t n, const std::function<void(int64_t)>& fn);

std::string format_double(double v);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::string to_csv() const;
};

// Two-state bandit benchmark: a 3x3 grid of (behavior, evaluation) rows at the
// annotated state, estimators IS / naive / C*-IS, single-sample bias, std, and
// rmse from Monte Carlo plus closed-form columns where available.
struct BanditTableConfig {
    int n_reps = 100000;
    uint64_t master_seed = 1;
    int jobs = 1;
};
Table run_bandit_table(const BanditTableConfig& cfg);

// One-state bandit C-IS weight sweep: constant factual weights on a 2-D grid
// (one axis per factual action), closed-form and Monte Carlo std, bias flags
// at 4 standard errors.  Also emits the random-uniform width sweep.
struct WeightHeatmapConfig {
    int grid_points = 11;    // per axis, inclusive of 0 and 1
    int width_points = 11;   // random-uniform widths in [0, 1]
    int n_reps = 2000;
    uint64_t master_seed = 1;
    int jobs = 1;
};
struct WeightHeatmapResult {
    Table grid;
    Table width_sweep;
};
WeightHeatmapResult run_weight_heatmap(const WeightHeatmapConfig& cfg);

// One-state bandit C-IS with per-action annotation availability swept over a
// 2-D grid; equal-split weights over available annotations, with and without
// imputation, common random numbers across the two branches.
struct MissingnessHeatmapConfig {
    int grid_points = 6;
    int n_reps = 2000;
    int episodes_per_rep = 200;
    uint64_t master_seed = 1;
    int jobs = 1;
};
Table run_missingness_heatmap(const MissingnessHeatmapConfig& cfg);

struct SepsisSuiteConfig {
    SepsisConfig env;
    int n_runs = 50;
    int n_episodes = 1000;
    std::vector<int> flip_counts = {50, 100, 200, 300, 400};
    int seeds_per_count = 5;
    double behavior_eps = 0.1;
    std::vector<double> noise_levels = {0.0, 0.1, 0.2, 0.5, 1.0};
    std::vector<double> availability_levels = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    double low_availability = 0.1;
    uint64_t master_seed = 1;
    int jobs = 1;
};
struct SepsisSuiteResult {
    std::vector<Table> tables;  // policy_table, summary, kl_scatter, noise_sweep,
                                // availability_sweep, low_availability_noise_sweep
    const Table& table(const std::string& name) const;
};
SepsisSuiteResult run_sepsis_suite(const SepsisSuiteConfig& cfg);

}  // namespace semiope
