#include "semiope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace semiope {

std::vector<double> average_ranks(std::span<const double> xs) {
    const size_t n = xs.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t i, size_t j) { return xs[i] < xs[j]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        double r = 0.5 * double(i + j) + 1.0;  // average of 1-based ranks i+1..j+1
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman requires two equal-length series of size >= 2");
    std::vector<double> ra = average_ranks(a), rb = average_ranks(b);
    double ma = mean_of(ra), mb = mean_of(rb);
    double num = 0.0, va = 0.0, vb = 0.0;
    for (size_t i = 0; i < ra.size(); ++i) {
        double da = ra[i] - ma, db = rb[i] - mb;
        num += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return num / std::sqrt(va * vb);
}

MetricsReport compute_metrics(const std::vector<std::vector<double>>& estimates,
                              std::span<const double> true_values,
                              std::span<const std::string> labels, double behavior_value,
                              const std::vector<std::vector<double>>& ess) {
    const size_t n_seeds = estimates.size();
    const size_t n_pol = true_values.size();
    if (n_seeds == 0 || n_pol == 0) throw std::invalid_argument("compute_metrics: empty input");
    if (labels.size() != n_pol)
        throw std::invalid_argument("compute_metrics: label count mismatch");
    for (const auto& row : estimates)
        if (row.size() != n_pol)
            throw std::invalid_argument("compute_metrics: ragged estimate table");

    MetricsReport rep;
    rep.per_policy.resize(n_pol);
    std::vector<double> col(n_seeds);
    for (size_t p = 0; p < n_pol; ++p) {
        for (size_t s = 0; s < n_seeds; ++s) col[s] = estimates[s][p];
        PolicyMetrics& pm = rep.per_policy[p];
        pm.label = labels[p];
        pm.true_value = true_values[p];
        pm.mean_estimate = mean_of(col);
        pm.bias = pm.mean_estimate - pm.true_value;
        pm.std_dev = std::sqrt(variance_of(col));
        pm.rmse = std::sqrt(pm.bias * pm.bias + pm.std_dev * pm.std_dev);
        if (!ess.empty()) {
            double e = 0.0;
            for (size_t s = 0; s < n_seeds; ++s) e += ess[s][p];
            pm.ess_mean = e / double(n_seeds);
        }
    }

    std::vector<double> seed_rmse(n_seeds), seed_rho(n_seeds), seed_ess;
    int64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (size_t s = 0; s < n_seeds; ++s) {
        double se = 0.0;
        for (size_t p = 0; p < n_pol; ++p) {
            double d = estimates[s][p] - true_values[p];
            se += d * d;
            bool truth = true_values[p] >= behavior_value;
            bool pred = estimates[s][p] >= behavior_value;
            if (truth && pred) ++tp;
            else if (truth) ++fn;
            else if (pred) ++fp;
            else ++tn;
        }
        seed_rmse[s] = std::sqrt(se / double(n_pol));
        seed_rho[s] = n_pol >= 2 ? spearman_correlation(estimates[s], true_values) : 0.0;
        if (!ess.empty()) seed_ess.push_back(mean_of(ess[s]));
    }
    rep.rmse_mean = mean_of(seed_rmse);
    rep.rmse_std = std::sqrt(variance_of(seed_rmse));
    rep.spearman_mean = mean_of(seed_rho);
    rep.spearman_std = std::sqrt(variance_of(seed_rho));
    double total = double(tp + tn + fp + fn);
    rep.accuracy = double(tp + tn) / total;
    rep.fpr = (fp + tn) > 0 ? double(fp) / double(fp + tn) : 0.0;
    rep.fnr = (fn + tp) > 0 ? double(fn) / double(fn + tp) : 0.0;
    if (!seed_ess.empty()) {
        rep.ess_mean = mean_of(seed_ess);
        rep.ess_std = std::sqrt(variance_of(seed_ess));
    }
    return rep;
}

}  // namespace semiope
