#pragma once

#include <string>
#include <vector>

#include "semiope/annotation.hpp"
#include "semiope/mdp.hpp"

namespace semiope {

struct EstimateReport {
    std::string estimator_id;
    double value = 0.0;
    double ess = 0.0;
    int n = 0;
    std::vector<double> per_trajectory_estimates;
    std::vector<double> per_trajectory_weights;
};

// (sum w)^2 / sum w^2; zero for an all-zero weight vector
double effective_sample_size(std::span<const double> weights);

EstimateReport is_estimate(const Dataset& data, const Policy& pi_e, const Policy& pi_b,
                           double discount);

EstimateReport pdis(const Dataset& data, const Policy& pi_e, const Policy& pi_b,
                    double discount);

// per-step weight normalization across trajectories; terminated trajectories
// keep their last cumulative ratio with zero reward
EstimateReport pdwis(const Dataset& data, const Policy& pi_e, const Policy& pi_b,
                     double discount);

// trajectory-level self-normalization of an existing ratio-weighted report
EstimateReport wis_from_report(const EstimateReport& report);

// counterfactual-augmented estimators; the bandit forms require single-step
// trajectories.  pi_b_plus is the augmented behavior policy of Definition 1.
EstimateReport cis(const WeightedDataset& wd, const Policy& pi_e, const Policy& pi_b_plus);

EstimateReport cstar_is(const AnnotatedDataset& data, const Policy& pi_e);

EstimateReport cpdis(const WeightedDataset& wd, const Policy& pi_e, const Policy& pi_b_plus,
                     double discount);

EstimateReport cstar_pdis(const AnnotatedDataset& data, const Policy& pi_e, double discount);

// expands every annotation into a synthetic sub-trajectory (observed prefix
// plus the counterfactual final step) and averages plain per-decision IS over
// the union of real and synthetic entries, all ratios against pi_b_plus
EstimateReport naive_unweighted(const AnnotatedDataset& data, const Policy& pi_e,
                                const Policy& pi_b_plus, double discount);

// convex per-trajectory combination of the factual estimate and one term per
// annotated step (binary actions); factual ratios against pi_b, the final
// counterfactual ratio against pi_b_plus
EstimateReport naive_weighted(const AnnotatedDataset& data, const Policy& pi_e,
                              const Policy& pi_b, const Policy& pi_b_plus, double discount);

// combined step ratios rho+_{W,t} = sum_a~ w_t^a~ pi_e(a~|s_t) / pi_b+(a~|s_t)
std::vector<double> rho_plus_steps(const AnnotatedTrajectory& traj,
                                   const std::vector<std::vector<double>>& step_weights,
                                   const Policy& pi_e, const Policy& pi_b_plus);

}  // namespace semiope
