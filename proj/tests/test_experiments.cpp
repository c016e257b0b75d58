#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "semiope/experiments.hpp"

using namespace semiope;

namespace {

int col_index(const Table& tab, const std::string& name) {
    for (size_t c = 0; c < tab.columns.size(); ++c)
        if (tab.columns[c] == name) return int(c);
    FAIL("missing column ", name, " in ", tab.name);
    return -1;
}

double cell(const Table& tab, const std::vector<std::string>& row, const std::string& name) {
    return std::stod(row[col_index(tab, name)]);
}

const std::vector<std::string>& find_row(const Table& tab,
                                         const std::vector<std::pair<std::string, std::string>>&
                                             match) {
    for (const auto& row : tab.rows) {
        bool ok = true;
        for (const auto& [col, val] : match)
            if (row[col_index(tab, col)] != val) ok = false;
        if (ok) return row;
    }
    FAIL("no matching row in ", tab.name);
    return tab.rows.front();
}

}  // namespace

TEST_CASE("parallel_for fills per-index slots deterministically") {
    const int64_t n = 10000;
    std::vector<double> a(n), b(n);
    auto fn = [](std::vector<double>& out) {
        return [&out](int64_t i) {
            RngStream rng = RngStream::derive(1, "slot", {uint64_t(i)});
            out[i] = rng.next_normal();
        };
    };
    serial_for(n, fn(a));
    parallel_for(n, 4, fn(b));
    CHECK(a == b);
}

TEST_CASE("parallel_for propagates exceptions") {
    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](int64_t i) {
                                     if (i == 57) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}

TEST_CASE("table csv") {
    Table tab;
    tab.name = "t";
    tab.columns = {"a", "b"};
    tab.add_row({"1", "2"});
    CHECK(tab.to_csv() == "a,b\n1,2\n");
    CHECK_THROWS_AS(tab.add_row({"only_one"}), std::invalid_argument);
}

TEST_CASE("rank and correlation helpers") {
    std::vector<double> xs = {3.0, 1.0, 4.0, 1.0};
    std::vector<double> ranks = average_ranks(xs);
    CHECK(ranks == std::vector<double>{3.0, 1.5, 4.0, 1.5});

    std::vector<double> up = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> down = {4.0, 3.0, 2.0, 1.0};
    CHECK(spearman_correlation(up, up) == doctest::Approx(1.0));
    CHECK(spearman_correlation(up, down) == doctest::Approx(-1.0));
    // one adjacent swap among four: 1 - 6*2/(4*15)
    std::vector<double> swapped = {1.0, 2.0, 4.0, 3.0};
    CHECK(spearman_correlation(up, swapped) == doctest::Approx(0.8));
    std::vector<double> flat = {2.0, 2.0, 2.0, 2.0};
    CHECK(spearman_correlation(up, flat) == 0.0);
}

TEST_CASE("compute_metrics identities and classification counts") {
    // two policies, three seeds; behavior value 0 separates the labels
    std::vector<double> truth = {1.0, -1.0};
    std::vector<std::string> labels = {"good", "bad"};
    std::vector<std::vector<double>> est = {
        {1.5, -0.5},  // ranks correct, classifies both correctly
        {0.5, -1.5},  // ranks correct
        {-0.5, 0.5},  // ranks inverted, misclassifies both
    };
    MetricsReport m = compute_metrics(est, truth, labels, 0.0);
    REQUIRE(m.per_policy.size() == 2);
    const PolicyMetrics& p0 = m.per_policy[0];
    CHECK(p0.mean_estimate == doctest::Approx(0.5));
    CHECK(p0.bias == doctest::Approx(-0.5));
    CHECK(p0.rmse * p0.rmse ==
          doctest::Approx(p0.bias * p0.bias + p0.std_dev * p0.std_dev).epsilon(1e-12));

    CHECK(m.spearman_mean == doctest::Approx((1.0 + 1.0 - 1.0) / 3.0));
    // 6 decisions: seed 3 flips both -> accuracy 4/6, one FP among 3 negatives
    CHECK(m.accuracy == doctest::Approx(4.0 / 6.0));
    CHECK(m.fpr == doctest::Approx(1.0 / 3.0));
    CHECK(m.fnr == doctest::Approx(1.0 / 3.0));

    // per-seed rmse: sqrt(mean of squared errors across policies)
    double r1 = std::sqrt((0.25 + 0.25) / 2.0);
    double r3 = std::sqrt((2.25 + 2.25) / 2.0);
    CHECK(m.rmse_mean == doctest::Approx((r1 + r1 + r3) / 3.0));
}

TEST_CASE("bandit table closed-form columns and mc agreement") {
    BanditTableConfig cfg;
    cfg.n_reps = 20000;
    cfg.jobs = 0;
    Table tab = run_bandit_table(cfg);
    CHECK(tab.rows.size() == 27);

    // the fully mismatched deterministic pair, worked out by hand
    const auto& is_row = find_row(tab, {{"behavior", "[1,0]"},
                                        {"evaluation", "[0,1]"},
                                        {"estimator", "is"}});
    CHECK(cell(tab, is_row, "bias_exact") == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(cell(tab, is_row, "std_exact") == doctest::Approx(std::sqrt(0.375)).epsilon(1e-9));
    CHECK(cell(tab, is_row, "bias") == doctest::Approx(-1.0).epsilon(0.02));

    const auto& cs_row = find_row(tab, {{"behavior", "[1,0]"},
                                        {"evaluation", "[0,1]"},
                                        {"estimator", "cstar_is"}});
    CHECK(cell(tab, cs_row, "bias_exact") == doctest::Approx(0.0).scale(1.0));
    CHECK(cell(tab, cs_row, "std_exact") == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(cell(tab, cs_row, "bias") == doctest::Approx(0.0).scale(1.0).epsilon(0.05));
    CHECK(cell(tab, cs_row, "std") ==
          doctest::Approx(cell(tab, cs_row, "std_exact")).epsilon(0.05));

    const auto& nv_row = find_row(tab, {{"behavior", "[1,0]"},
                                        {"evaluation", "[0,1]"},
                                        {"estimator", "naive"}});
    CHECK(cell(tab, nv_row, "bias") == doctest::Approx(1.0 / 6.0).epsilon(0.25));
    CHECK(cell(tab, nv_row, "std") == doctest::Approx(1.818).epsilon(0.03));
    CHECK(nv_row[col_index(tab, "bias_exact")].empty());

    // on-policy diagonal is unbiased for is
    const auto& diag = find_row(tab, {{"behavior", "[0.5,0.5]"},
                                      {"evaluation", "[0.5,0.5]"},
                                      {"estimator", "is"}});
    CHECK(cell(tab, diag, "bias_exact") == doctest::Approx(0.0).scale(1.0));

    // every monte carlo cell sits close to its closed form
    for (const auto& row : tab.rows) {
        if (row[col_index(tab, "bias_exact")].empty()) continue;
        CHECK(std::abs(cell(tab, row, "bias") - cell(tab, row, "bias_exact")) < 0.05);
        CHECK(std::abs(cell(tab, row, "std") - cell(tab, row, "std_exact")) < 0.05);
    }
}

TEST_CASE("bandit table is byte identical across job counts") {
    BanditTableConfig cfg;
    cfg.n_reps = 4000;
    cfg.jobs = 1;
    std::string serial = run_bandit_table(cfg).to_csv();
    cfg.jobs = 4;
    std::string parallel = run_bandit_table(cfg).to_csv();
    CHECK(serial == parallel);
}

TEST_CASE("weight heatmap markers, flags and variance ordering") {
    WeightHeatmapConfig cfg;
    cfg.grid_points = 3;
    cfg.width_points = 3;
    cfg.n_reps = 4000;
    cfg.jobs = 0;
    WeightHeatmapResult res = run_weight_heatmap(cfg);
    CHECK(res.grid.rows.size() == 9);

    const auto& eq = find_row(res.grid, {{"marker", "equal_split"}});
    CHECK(cell(res.grid, eq, "w0") == 0.5);
    CHECK(cell(res.grid, eq, "w1") == 0.5);
    const auto& fo = find_row(res.grid, {{"marker", "factual_only"}});
    CHECK(cell(res.grid, fo, "w0") == 1.0);

    // keeping annotations strictly shrinks the spread in this setting
    CHECK(cell(res.grid, eq, "std_exact") < cell(res.grid, fo, "std_exact"));
    CHECK(cell(res.grid, eq, "std") < cell(res.grid, fo, "std"));

    // interior cells are unbiased; the support-losing corners are flagged
    CHECK(cell(res.grid, eq, "bias_exact") == doctest::Approx(0.0).scale(1.0));
    CHECK(std::stoi(eq[col_index(res.grid, "bias_flag")]) == 0);
    const auto& corner01 = find_row(res.grid, {{"w0", "0"}, {"w1", "1"}});
    CHECK(std::abs(cell(res.grid, corner01, "bias_exact")) > 0.1);
    CHECK(std::stoi(corner01[col_index(res.grid, "bias_flag")]) == 1);
    const auto& corner10 = find_row(res.grid, {{"w0", "1"}, {"w1", "0"}});
    CHECK(std::stoi(corner10[col_index(res.grid, "bias_flag")]) == 1);

    // width sweep: exact std grows with the weight noise, mc follows
    CHECK(res.width_sweep.rows.size() == 3);
    double s0 = cell(res.width_sweep, res.width_sweep.rows.front(), "std_exact");
    double s1 = cell(res.width_sweep, res.width_sweep.rows.back(), "std_exact");
    CHECK(s1 > s0);
    for (const auto& row : res.width_sweep.rows)
        CHECK(cell(res.width_sweep, row, "std") ==
              doctest::Approx(cell(res.width_sweep, row, "std_exact")).epsilon(0.1));
}

TEST_CASE("missingness heatmap: imputation helps and never changes full rows") {
    MissingnessHeatmapConfig cfg;
    cfg.grid_points = 3;
    cfg.n_reps = 400;
    cfg.episodes_per_rep = 100;
    cfg.jobs = 0;
    Table tab = run_missingness_heatmap(cfg);
    CHECK(tab.rows.size() == 9);

    for (const auto& row : tab.rows) {
        double a0 = cell(tab, row, "avail0"), a1 = cell(tab, row, "avail1");
        double sp = cell(tab, row, "std_plain"), si = cell(tab, row, "std_imputed");
        if ((a0 == 0.0 && a1 == 0.0) || (a0 == 1.0 && a1 == 1.0)) {
            // nothing to impute: both branches see identical data
            CHECK(row[col_index(tab, "bias_plain")] == row[col_index(tab, "bias_imputed")]);
            CHECK(row[col_index(tab, "std_plain")] == row[col_index(tab, "std_imputed")]);
        } else {
            CHECK(si <= sp * 1.1 + 1e-9);
        }
    }
}

TEST_CASE("sepsis suite smoke run") {
    SepsisSuiteConfig cfg;
    cfg.n_runs = 3;
    cfg.n_episodes = 150;
    cfg.flip_counts = {100, 300};
    cfg.seeds_per_count = 1;
    cfg.noise_levels = {0.0, 0.5};
    cfg.availability_levels = {0.0, 1.0};
    cfg.jobs = 0;
    SepsisSuiteResult res = run_sepsis_suite(cfg);
    REQUIRE(res.tables.size() == 6);

    const Table& summary = res.table("summary");
    CHECK(summary.rows.size() == 7);
    const Table& policy_tab = res.table("policy_table");
    CHECK(policy_tab.rows.size() == 7 * 3);

    // annotation-complete deterministic targets keep every sample: ess == n
    const auto& ce = find_row(summary, {{"estimator", "cstar_pdis_qe"}});
    CHECK(cell(summary, ce, "ess_mean") == doctest::Approx(150.0).epsilon(1e-9));
    CHECK(cell(summary, ce, "ess_std") == doctest::Approx(0.0).scale(1.0));
    const auto& pd = find_row(summary, {{"estimator", "pdis"}});
    CHECK(cell(summary, pd, "ess_mean") < 150.0);
    CHECK(cell(summary, ce, "rmse_mean") < cell(summary, pd, "rmse_mean"));

    const Table& kl = res.table("kl_scatter");
    CHECK(kl.rows.size() == 3);
    CHECK(cell(kl, find_row(kl, {{"policy", "optimal"}}), "kl") <
          cell(kl, find_row(kl, {{"flips", "300"}}), "kl"));

    CHECK(res.table("noise_sweep").rows.size() == 2);
    CHECK(res.table("availability_sweep").rows.size() == 2);
    CHECK(res.table("low_availability_noise_sweep").rows.size() == 2);
    CHECK_THROWS_AS(res.table("nonexistent"), std::invalid_argument);
}

TEST_CASE("sepsis suite is byte identical across job counts") {
    SepsisSuiteConfig cfg;
    cfg.n_runs = 2;
    cfg.n_episodes = 60;
    cfg.flip_counts = {200};
    cfg.seeds_per_count = 1;
    cfg.noise_levels = {0.0, 0.5};
    cfg.availability_levels = {0.5};
    cfg.jobs = 1;
    SepsisSuiteResult serial = run_sepsis_suite(cfg);
    cfg.jobs = 4;
    SepsisSuiteResult parallel = run_sepsis_suite(cfg);
    REQUIRE(serial.tables.size() == parallel.tables.size());
    for (size_t i = 0; i < serial.tables.size(); ++i)
        CHECK(serial.tables[i].to_csv() == parallel.tables[i].to_csv());
}
