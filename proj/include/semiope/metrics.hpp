#pragma once

#include <string>
#include <vector>

#include "semiope/mdp.hpp"

namespace semiope {

// ranks with averaged ties, 1-based
std::vector<double> average_ranks(std::span<const double> xs);

double spearman_correlation(std::span<const double> a, std::span<const double> b);

struct PolicyMetrics {
    std::string label;
    double true_value = 0.0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double std_dev = 0.0;  // population, so rmse^2 = bias^2 + std^2 exactly
    double rmse = 0.0;
    double ess_mean = 0.0;
};

struct MetricsReport {
    std::vector<PolicyMetrics> per_policy;
    // per-seed RMSE over all policies, aggregated across seeds
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    // per-seed Spearman between estimates and true values, aggregated
    double spearman_mean = 0.0;
    double spearman_std = 0.0;
    double accuracy = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double ess_mean = 0.0;
    double ess_std = 0.0;
};

// estimates[seed][policy]; ess may be empty or shaped like estimates
MetricsReport compute_metrics(const std::vector<std::vector<double>>& estimates,
                              std::span<const double> true_values,
                              std::span<const std::string> labels, double behavior_value,
                              const std::vector<std::vector<double>>& ess = {});

}  // namespace semiope
