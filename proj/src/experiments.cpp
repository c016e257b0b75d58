#include "semiope/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semiope {

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    if (const char* env = std::getenv("SEMI_OPE_JOBS")) {
        int j = std::atoi(env);
        if (j > 0) return j;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

void serial_for(int64_t n, const std::function<void(int64_t)>& fn) {
    for (int64_t i = 0; i < n; ++i) fn(i);
}

void parallel_for(int64_t n, int jobs, const std::function<void(int64_t)>& fn) {
    jobs = resolve_jobs(jobs);
    if (jobs <= 1 || n <= 1) {
        serial_for(n, fn);
        return;
    }
#ifdef _OPENMP
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
    for (int64_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
#else
    serial_for(n, fn);
#endif
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("table row width mismatch in " + name);
    rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
    std::string out;
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

namespace {

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;
};

Moments moments_of(std::span<const double> xs) {
    Moments m;
    m.mean = mean_of(xs);
    m.std_dev = std::sqrt(variance_of(xs));
    return m;
}

}  // namespace

Table run_bandit_table(const BanditTableConfig& cfg) {
    BanditSpec spec;
    spec.num_states = 2;
    spec.num_actions = 2;
    spec.reward_means = {1.0, 2.0, 1.0, 1.0};
    spec.reward_stds = {0.5, 0.5, 0.5, 0.5};
    spec.state_probs = {0.5, 0.5};
    TabularMDP mdp = make_two_state_bandit(spec);
    const double sigma_g = 0.5;

    struct Row {
        std::string label;
        std::array<double, 2> p;
    };
    const std::vector<Row> grid = {
        {"[1,0]", {1.0, 0.0}}, {"[0.5,0.5]", {0.5, 0.5}}, {"[0,1]", {0.0, 1.0}}};

    Table tab;
    tab.name = "bandit_table";
    tab.columns = {"behavior",  "evaluation", "estimator",  "bias",      "std",
                   "rmse",      "bias_exact", "std_exact",  "rmse_exact"};

    AnnotationErrorModel err;
    err.sigma_g = {sigma_g, sigma_g, sigma_g, sigma_g};

    for (size_t ib = 0; ib < grid.size(); ++ib)
        for (size_t ie = 0; ie < grid.size(); ++ie) {
            Policy pi_b(2, 2), pi_e(2, 2);
            for (int a = 0; a < 2; ++a) {
                pi_b.at(0, a) = grid[ib].p[a];
                pi_e.at(0, a) = grid[ie].p[a];
            }
            pi_b.at(1, 0) = 1.0;
            pi_e.at(1, 0) = 1.0;
            double v = exact_policy_value(mdp, pi_e);

            // annotations exist only at the first state
            AnnotationSpec aspec;
            aspec.source = AnnotationSource::reward_mean;
            aspec.noise_std = sigma_g;
            aspec.pair_mask = {1, 1, 0, 0};

            // equal-split augmented behavior: both actions get half of every
            // factual sample at the annotated state
            Policy pbp(2, 2);
            pbp.at(0, 0) = 0.5;
            pbp.at(0, 1) = 0.5;
            pbp.at(1, 0) = 1.0;

            const int n = cfg.n_reps;
            std::vector<double> is_vals(n), cstar_vals(n), naive_vals(size_t(n) * 2);
            std::vector<int> naive_cnt(n);
            parallel_for(n, cfg.jobs, [&](int64_t rep) {
                RngStream rng = RngStream::derive(cfg.master_seed, "bandit_ep",
                                                  {ib, ie, uint64_t(rep)});
                Dataset d;
                d.push_back(sample_trajectory(mdp, pi_b, rng));
                AnnotationSpec s = aspec;
                s.seed = RngStream::derive(cfg.master_seed, "bandit_annot",
                                           {ib, ie, uint64_t(rep)})
                             .key();
                AnnotatedDataset ann = annotate(d, mdp, &pi_e, &pi_b, s);
                is_vals[rep] = is_estimate(d, pi_e, pi_b, 1.0).value;
                cstar_vals[rep] = cstar_is(ann, pi_e).value;
                EstimateReport nv = naive_unweighted(ann, pi_e, pbp, 1.0);
                naive_cnt[rep] = nv.n;
                for (int k = 0; k < nv.n; ++k)
                    naive_vals[size_t(rep) * 2 + k] = nv.per_trajectory_estimates[k];
            });

            // the naive baseline pools every real and synthetic entry; its
            // single-sample moments are over that pool
            std::vector<double> pool;
            pool.reserve(size_t(n) * 2);
            for (int rep = 0; rep < n; ++rep)
                for (int k = 0; k < naive_cnt[rep]; ++k)
                    pool.push_back(naive_vals[size_t(rep) * 2 + k]);

            TheoryReport th_is = theory_is(mdp, pi_e, pi_b);
            TheoryReport th_cs = theory_cstar_is(mdp, pi_e, pi_b, err);

            auto add = [&](const char* est, Moments m, const TheoryReport* th) {
                double bias = m.mean - v;
                double rmse = std::sqrt(bias * bias + m.std_dev * m.std_dev);
                std::vector<std::string> row = {grid[ib].label,    grid[ie].label,
                                                est,               format_double(bias),
                                                format_double(m.std_dev), format_double(rmse)};
                if (th) {
                    row.push_back(format_double(th->bias));
                    row.push_back(format_double(th->std_dev()));
                    row.push_back(format_double(th->rmse()));
                } else {
                    row.insert(row.end(), {"", "", ""});
                }
                tab.add_row(std::move(row));
            };
            add("is", moments_of(is_vals), &th_is);
            add("naive", moments_of(pool), nullptr);
            add("cstar_is", moments_of(cstar_vals), &th_cs);
        }
    return tab;
}

namespace {

// shared one-state setting for the weight and missingness sweeps
struct OneStateSetting {
    TabularMDP mdp;
    Policy pi_b{1, 2};
    Policy pi_e{1, 2};
    double sigma_g0 = 1.0, sigma_g1 = 1.0;
};

OneStateSetting base_one_state() {
    OneStateSetting st;
    st.mdp = make_one_state_bandit(1.0, 2.0, 1.0, 1.0);
    st.pi_b.at(0, 0) = 0.1;
    st.pi_b.at(0, 1) = 0.9;
    st.pi_e.at(0, 0) = 0.8;
    st.pi_e.at(0, 1) = 0.2;
    return st;
}

// C-IS kernel that drops terms outside the augmented support, so boundary
// weight choices show up as bias rather than as errors
double cis_drop_unsupported(std::span<const double> w, int a, double r,
                            std::span<const double> g, const Policy& pi_e,
                            std::span<const double> pbp) {
    double v = 0.0;
    for (size_t at = 0; at < w.size(); ++at) {
        if (w[at] == 0.0 || pbp[at] <= 0.0) continue;
        double y = (int(at) == a) ? r : g[at];
        v += w[at] * pi_e(0, int(at)) / pbp[at] * y;
    }
    return v;
}

}  // namespace

WeightHeatmapResult run_weight_heatmap(const WeightHeatmapConfig& cfg) {
    OneStateSetting st = base_one_state();
    const double v = exact_policy_value(st.mdp, st.pi_e);
    AnnotationErrorModel err;
    err.sigma_g = {st.sigma_g0, st.sigma_g1};
    const std::vector<double> avail = {1.0, 1.0};
    const int G = cfg.grid_points, n = cfg.n_reps;

    WeightHeatmapResult res;
    res.grid.name = "weight_heatmap";
    res.grid.columns = {"w0",      "w1",        "bias_exact", "std_exact", "log10_std_exact",
                        "bias",    "std",       "bias_flag",  "marker"};

    std::vector<double> vals(size_t(G) * G * n);
    parallel_for(int64_t(G) * G, cfg.jobs, [&](int64_t cell) {
        int i = int(cell / G), j = int(cell % G);
        double w0 = double(i) / (G - 1), w1 = double(j) / (G - 1);
        WeightScheme scheme;
        scheme.kind = WeightScheme::constant_factual;
        scheme.factual_weights = {w0, w1};
        AvgWeightTable wt = scheme_weight_moments(1, 2, scheme, avail);
        Policy pbp = augmented_policy(wt, st.pi_b);
        for (int rep = 0; rep < n; ++rep) {
            RngStream rng = RngStream::derive(cfg.master_seed, "weight_grid",
                                              {uint64_t(cell), uint64_t(rep)});
            int a = int(rng.next_bernoulli(st.pi_b(0, 1)));
            double r = st.mdp.rmean(0, a) + st.mdp.rstd(0, a) * rng.next_normal();
            std::array<double, 2> g = {0.0, 0.0};
            int cf = 1 - a;
            g[cf] = st.mdp.rmean(0, cf) +
                    (cf == 0 ? st.sigma_g0 : st.sigma_g1) * rng.next_normal();
            std::array<double, 2> w = {0.0, 0.0};
            double f = scheme.factual_weights[a];
            w[a] = f;
            w[cf] = 1.0 - f;
            vals[size_t(cell) * n + rep] =
                cis_drop_unsupported(w, a, r, g, st.pi_e, pbp.row(0));
        }
    });

    for (int cell = 0; cell < G * G; ++cell) {
        int i = cell / G, j = cell % G;
        double w0 = double(i) / (G - 1), w1 = double(j) / (G - 1);
        WeightScheme scheme;
        scheme.kind = WeightScheme::constant_factual;
        scheme.factual_weights = {w0, w1};
        AvgWeightTable wt = scheme_weight_moments(1, 2, scheme, avail);
        TheoryReport th = theory_cis(st.mdp, st.pi_e, st.pi_b, wt, err);
        Moments m = moments_of(std::span<const double>(vals).subspan(size_t(cell) * n, n));
        double bias = m.mean - v;
        bool flag = std::abs(bias) > 4.0 * m.std_dev / std::sqrt(double(n));
        std::string marker;
        if (w0 == 0.5 && w1 == 0.5) marker = "equal_split";
        if (w0 == 1.0 && w1 == 1.0) marker = "factual_only";
        res.grid.add_row({format_double(w0), format_double(w1), format_double(th.bias),
                          format_double(th.std_dev()), format_double(std::log10(th.std_dev())),
                          format_double(bias), format_double(m.std_dev), flag ? "1" : "0",
                          marker});
    }

    res.width_sweep.name = "weight_width_sweep";
    res.width_sweep.columns = {"width", "bias_exact", "std_exact", "bias", "std"};
    const int W = cfg.width_points;
    std::vector<double> wvals(size_t(W) * n);
    parallel_for(W, cfg.jobs, [&](int64_t wi) {
        double width = double(wi) / (W - 1);
        WeightScheme scheme;
        scheme.kind = WeightScheme::random_uniform;
        scheme.width = width;
        AvgWeightTable wt = scheme_weight_moments(1, 2, scheme, avail);
        Policy pbp = augmented_policy(wt, st.pi_b);
        for (int rep = 0; rep < n; ++rep) {
            RngStream rng = RngStream::derive(cfg.master_seed, "weight_width",
                                              {uint64_t(wi), uint64_t(rep)});
            int a = int(rng.next_bernoulli(st.pi_b(0, 1)));
            double r = st.mdp.rmean(0, a) + st.mdp.rstd(0, a) * rng.next_normal();
            std::array<double, 2> g = {0.0, 0.0};
            int cf = 1 - a;
            g[cf] = st.mdp.rmean(0, cf) +
                    (cf == 0 ? st.sigma_g0 : st.sigma_g1) * rng.next_normal();
            double f = scheme.center + width * (rng.next_double() - 0.5);
            std::array<double, 2> w = {0.0, 0.0};
            w[a] = f;
            w[cf] = 1.0 - f;
            wvals[size_t(wi) * n + rep] =
                cis_drop_unsupported(w, a, r, g, st.pi_e, pbp.row(0));
        }
    });
    for (int wi = 0; wi < W; ++wi) {
        double width = double(wi) / (W - 1);
        WeightScheme scheme;
        scheme.kind = WeightScheme::random_uniform;
        scheme.width = width;
        AvgWeightTable wt = scheme_weight_moments(1, 2, scheme, avail);
        TheoryReport th = theory_cis(st.mdp, st.pi_e, st.pi_b, wt, err);
        Moments m = moments_of(std::span<const double>(wvals).subspan(size_t(wi) * n, n));
        res.width_sweep.add_row({format_double(width), format_double(th.bias),
                                 format_double(th.std_dev()), format_double(m.mean - v),
                                 format_double(m.std_dev)});
    }
    return res;
}

Table run_missingness_heatmap(const MissingnessHeatmapConfig& cfg) {
    OneStateSetting st = base_one_state();
    const double v = exact_policy_value(st.mdp, st.pi_e);
    const int G = cfg.grid_points, n = cfg.n_reps, N = cfg.episodes_per_rep;

    std::vector<double> plain(size_t(G) * G * n), imputed(size_t(G) * G * n);
    parallel_for(int64_t(G) * G * n, cfg.jobs, [&](int64_t task) {
        int64_t cell = task / n;
        int rep = int(task % n);
        int i = int(cell / G), j = int(cell % G);
        double p0 = double(i) / (G - 1), p1 = double(j) / (G - 1);

        Dataset d;
        d.reserve(N);
        for (int e = 0; e < N; ++e) {
            RngStream rng = RngStream::derive(cfg.master_seed, "missing_ep",
                                              {uint64_t(cell), uint64_t(rep), uint64_t(e)});
            d.push_back(sample_trajectory(st.mdp, st.pi_b, rng));
        }
        AnnotationSpec spec;
        spec.source = AnnotationSource::reward_mean;
        spec.noise_std = st.sigma_g0;
        spec.per_action_fraction = {p0, p1};
        spec.seed = RngStream::derive(cfg.master_seed, "missing_annot",
                                      {uint64_t(cell), uint64_t(rep)})
                        .key();
        AnnotatedDataset ann = annotate(d, st.mdp, &st.pi_e, &st.pi_b, spec);

        WeightScheme scheme;  // equal split over the available annotations
        auto cis_value = [&](const AnnotatedDataset& a) {
            WeightedDataset wd = assign_weights(a, scheme);
            AvgWeightTable wt = average_weights(wd, 1, 2);
            Policy pbp = augmented_policy(wt, st.pi_b);
            return cis(wd, st.pi_e, pbp).value;
        };
        plain[task] = cis_value(ann);
        imputed[task] = cis_value(impute_missing(ann));
    });

    Table tab;
    tab.name = "missingness_heatmap";
    tab.columns = {"avail0",     "avail1",       "bias_plain", "std_plain",
                   "bias_imputed", "std_imputed"};
    for (int cell = 0; cell < G * G; ++cell) {
        int i = cell / G, j = cell % G;
        Moments mp = moments_of(std::span<const double>(plain).subspan(size_t(cell) * n, n));
        Moments mi = moments_of(std::span<const double>(imputed).subspan(size_t(cell) * n, n));
        tab.add_row({format_double(double(i) / (G - 1)), format_double(double(j) / (G - 1)),
                     format_double(mp.mean - v), format_double(mp.std_dev),
                     format_double(mi.mean - v), format_double(mi.std_dev)});
    }
    return tab;
}

const Table& SepsisSuiteResult::table(const std::string& name) const {
    for (const Table& t : tables)
        if (t.name == name) return t;
    throw std::invalid_argument("no such table: " + name);
}

SepsisSuiteResult run_sepsis_suite(const SepsisSuiteConfig& cfg) {
    TabularMDP mdp = make_sepsis_mdp(cfg.env);
    const int S = mdp.num_states, A = mdp.num_actions;
    Policy opt = optimal_policy(mdp);
    Policy pi_b = eps_greedy(opt, cfg.behavior_eps);
    std::vector<LabeledPolicy> policies =
        make_policy_set(opt, cfg.flip_counts, cfg.seeds_per_count, cfg.master_seed);
    const int P = int(policies.size());

    std::vector<double> true_values(P);
    std::vector<std::string> labels(P);
    std::vector<QTable> q_e(P);
    for (int p = 0; p < P; ++p) {
        labels[p] = policies[p].label;
        q_e[p] = horizon_q_values(mdp, policies[p].policy);
        true_values[p] = exact_policy_value(mdp, policies[p].policy);
    }
    QTable q_b = horizon_q_values(mdp, pi_b);
    double v_b = exact_policy_value(mdp, pi_b);

    Policy pbp_eq(S, A);  // equal-split augmented behavior under full annotation
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) pbp_eq.at(s, a) = 1.0 / A;

    const std::vector<std::string> est_ids = {
        "pdis",          "pdwis",         "naive",
        "naive_weighted", "cstar_pdis_qe", "cstar_pdis_qb",
        "cstar_pdis_qb_corrected"};
    const int E = int(est_ids.size());
    const int R = cfg.n_runs;
    const int NL = int(cfg.noise_levels.size());
    const int QL = int(cfg.availability_levels.size());

    auto grid3 = [&](int a, int b, int c) {
        return std::vector<std::vector<std::vector<double>>>(
            a, std::vector<std::vector<double>>(b, std::vector<double>(c, 0.0)));
    };
    auto est = grid3(E, R, P), ess = grid3(E, R, P);
    auto noise_est = grid3(NL, R, P);
    auto avail_plain = grid3(QL, R, P), avail_imp = grid3(QL, R, P);
    auto low_plain = grid3(NL, R, P), low_imp = grid3(NL, R, P);

    WeightScheme eq_scheme;  // equal split
    auto cpdis_pipeline = [&](const AnnotatedDataset& ann, const Policy& pe) {
        WeightedDataset wd = assign_weights(ann, eq_scheme);
        AvgWeightTable wt = average_weights(wd, S, A);
        Policy pbp = augmented_policy(wt, pi_b);
        return cpdis(wd, pe, pbp, mdp.discount).value;
    };

    parallel_for(R, cfg.jobs, [&](int64_t r) {
        Dataset d;
        d.reserve(cfg.n_episodes);
        for (int e = 0; e < cfg.n_episodes; ++e) {
            RngStream rng =
                RngStream::derive(cfg.master_seed, "sepsis_ep", {uint64_t(r), uint64_t(e)});
            d.push_back(sample_trajectory(mdp, pi_b, rng));
        }
        ApproxMDP mhat = fit_approximate_mdp(d, mdp);
        QTable qb_hat = horizon_q_values(mhat.model, pi_b);

        AnnotationSpec spec_b;
        spec_b.seed = RngStream::derive(cfg.master_seed, "annot_b", {uint64_t(r)}).key();
        AnnotatedDataset ann_b = annotate_from_q(d, q_b, spec_b);

        for (int p = 0; p < P; ++p) {
            const Policy& pe = policies[p].policy;
            EstimateReport r_pdis = pdis(d, pe, pi_b, mdp.discount);
            est[0][r][p] = r_pdis.value;
            ess[0][r][p] = r_pdis.ess;
            EstimateReport r_pdwis = pdwis(d, pe, pi_b, mdp.discount);
            est[1][r][p] = r_pdwis.value;
            ess[1][r][p] = r_pdwis.ess;

            AnnotationSpec spec_e;
            spec_e.seed = RngStream::derive(cfg.master_seed, "annot_e",
                                            {uint64_t(r), uint64_t(p)})
                              .key();
            AnnotatedDataset ann_e = annotate_from_q(d, q_e[p], spec_e);

            // naive pooling pretends the augmented data came from pi_b+, so it
            // is weighted against the equal-split augmented policy throughout;
            // the weighted variant keeps plain pi_b ratios per its definition
            EstimateReport r_naive = naive_unweighted(ann_e, pe, pbp_eq, mdp.discount);
            est[2][r][p] = r_naive.value;
            ess[2][r][p] = r_naive.ess;
            EstimateReport r_nw = naive_weighted(ann_e, pe, pi_b, pbp_eq, mdp.discount);
            est[3][r][p] = r_nw.value;
            ess[3][r][p] = r_nw.ess;
            EstimateReport r_ce = cstar_pdis(ann_e, pe, mdp.discount);
            est[4][r][p] = r_ce.value;
            ess[4][r][p] = r_ce.ess;
            EstimateReport r_cb = cstar_pdis(ann_b, pe, mdp.discount);
            est[5][r][p] = r_cb.value;
            ess[5][r][p] = r_cb.ess;

            // model-based correction of behavior-value annotations
            QTable qe_hat = horizon_q_values(mhat.model, pe);
            AnnotatedDataset ann_c = ann_b;
            for (auto& traj : ann_c)
                for (size_t t = 0; t < traj.base.steps.size(); ++t) {
                    const Step& stp = traj.base.steps[t];
                    StepAnnotations& an = traj.annotations[t];
                    for (int a = 0; a < A; ++a)
                        if (an.available[a] && mhat.is_supported(stp.state, a))
                            an.value[a] += qe_hat.q(int(t), stp.state, a) -
                                           qb_hat.q(int(t), stp.state, a);
                }
            EstimateReport r_cc = cstar_pdis(ann_c, pe, mdp.discount);
            est[6][r][p] = r_cc.value;
            ess[6][r][p] = r_cc.ess;

            for (int ni = 0; ni < NL; ++ni) {
                if (cfg.noise_levels[ni] == 0.0) {
                    noise_est[ni][r][p] = r_ce.value;
                    continue;
                }
                AnnotationSpec spec_n;
                spec_n.noise_std = cfg.noise_levels[ni];
                spec_n.seed = RngStream::derive(cfg.master_seed, "annot_noise",
                                                {uint64_t(ni), uint64_t(r), uint64_t(p)})
                                  .key();
                noise_est[ni][r][p] = cstar_pdis(annotate_from_q(d, q_e[p], spec_n), pe,
                                                 mdp.discount)
                                          .value;
            }

            for (int qi = 0; qi < QL; ++qi) {
                AnnotationSpec spec_a;
                spec_a.availability_fraction = cfg.availability_levels[qi];
                spec_a.seed = RngStream::derive(cfg.master_seed, "annot_avail",
                                                {uint64_t(qi), uint64_t(r), uint64_t(p)})
                                  .key();
                AnnotatedDataset ann_a = annotate_from_q(d, q_e[p], spec_a);
                avail_plain[qi][r][p] = cpdis_pipeline(ann_a, pe);
                avail_imp[qi][r][p] = cpdis_pipeline(impute_missing(ann_a), pe);
            }

            for (int ni = 0; ni < NL; ++ni) {
                AnnotationSpec spec_l;
                spec_l.noise_std = cfg.noise_levels[ni];
                spec_l.availability_fraction = cfg.low_availability;
                spec_l.seed = RngStream::derive(cfg.master_seed, "annot_low",
                                                {uint64_t(ni), uint64_t(r), uint64_t(p)})
                                  .key();
                AnnotatedDataset ann_l = annotate_from_q(d, q_e[p], spec_l);
                low_plain[ni][r][p] = cpdis_pipeline(ann_l, pe);
                low_imp[ni][r][p] = cpdis_pipeline(impute_missing(ann_l), pe);
            }
        }
    });

    SepsisSuiteResult res;

    Table policy_tab;
    policy_tab.name = "policy_table";
    policy_tab.columns = {"estimator", "policy",   "flips", "true_value", "mean_estimate",
                          "bias",      "std",      "rmse",  "ess_mean"};
    Table summary;
    summary.name = "summary";
    summary.columns = {"estimator",     "rmse_mean", "rmse_std", "spearman_mean",
                       "spearman_std",  "accuracy",  "fpr",      "fnr",
                       "ess_mean",      "ess_std"};
    std::vector<MetricsReport> reports(E);
    for (int e = 0; e < E; ++e) {
        reports[e] = compute_metrics(est[e], true_values, labels, v_b, ess[e]);
        const MetricsReport& m = reports[e];
        for (int p = 0; p < P; ++p) {
            const PolicyMetrics& pm = m.per_policy[p];
            policy_tab.add_row({est_ids[e], pm.label, std::to_string(policies[p].flip_count),
                                format_double(pm.true_value), format_double(pm.mean_estimate),
                                format_double(pm.bias), format_double(pm.std_dev),
                                format_double(pm.rmse), format_double(pm.ess_mean)});
        }
        summary.add_row({est_ids[e], format_double(m.rmse_mean), format_double(m.rmse_std),
                         format_double(m.spearman_mean), format_double(m.spearman_std),
                         format_double(m.accuracy), format_double(m.fpr), format_double(m.fnr),
                         format_double(m.ess_mean), format_double(m.ess_std)});
    }

    Table kl_tab;
    kl_tab.name = "kl_scatter";
    kl_tab.columns = {"policy",        "flips",          "kl",
                      "rmse_pdis",     "rmse_cstar_qe",  "rmse_cstar_qb",
                      "rmse_cstar_qb_corrected"};
    std::vector<double> occ = time_averaged_occupancy(mdp, pi_b);
    for (int p = 0; p < P; ++p) {
        double kl = policy_kl(policies[p].policy, pi_b, occ);
        kl_tab.add_row({labels[p], std::to_string(policies[p].flip_count), format_double(kl),
                        format_double(reports[0].per_policy[p].rmse),
                        format_double(reports[4].per_policy[p].rmse),
                        format_double(reports[5].per_policy[p].rmse),
                        format_double(reports[6].per_policy[p].rmse)});
    }

    Table noise_tab;
    noise_tab.name = "noise_sweep";
    noise_tab.columns = {"noise", "rmse_cstar_qe", "spearman_cstar_qe", "rmse_pdis"};
    for (int ni = 0; ni < NL; ++ni) {
        MetricsReport m = compute_metrics(noise_est[ni], true_values, labels, v_b);
        noise_tab.add_row({format_double(cfg.noise_levels[ni]), format_double(m.rmse_mean),
                           format_double(m.spearman_mean),
                           format_double(reports[0].rmse_mean)});
    }

    Table avail_tab;
    avail_tab.name = "availability_sweep";
    avail_tab.columns = {"availability", "rmse_plain", "rmse_imputed"};
    for (int qi = 0; qi < QL; ++qi) {
        MetricsReport mp = compute_metrics(avail_plain[qi], true_values, labels, v_b);
        MetricsReport mi = compute_metrics(avail_imp[qi], true_values, labels, v_b);
        avail_tab.add_row({format_double(cfg.availability_levels[qi]),
                           format_double(mp.rmse_mean), format_double(mi.rmse_mean)});
    }

    Table low_tab;
    low_tab.name = "low_availability_noise_sweep";
    low_tab.columns = {"noise", "availability", "rmse_plain", "rmse_imputed"};
    for (int ni = 0; ni < NL; ++ni) {
        MetricsReport mp = compute_metrics(low_plain[ni], true_values, labels, v_b);
        MetricsReport mi = compute_metrics(low_imp[ni], true_values, labels, v_b);
        low_tab.add_row({format_double(cfg.noise_levels[ni]),
                         format_double(cfg.low_availability), format_double(mp.rmse_mean),
                         format_double(mi.rmse_mean)});
    }

    res.tables = {std::move(policy_tab), std::move(summary),   std::move(kl_tab),
                  std::move(noise_tab),  std::move(avail_tab), std::move(low_tab)};
    return res;
}

}  // namespace semiope
