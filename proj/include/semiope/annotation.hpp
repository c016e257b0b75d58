#pragma once

#include <optional>
#include <vector>

#include "semiope/mdp.hpp"

namespace semiope {

enum class AnnotationSource { q_eval, q_behavior, reward_mean };

struct AnnotationSpec {
    AnnotationSource source = AnnotationSource::q_eval;
    double noise_std = 0.0;
    // availability of each counterfactual annotation; draws are Bernoulli per
    // (trajectory, step, action) from a counter-based stream, so masks do not
    // depend on iteration order.  per_action_fraction (if nonempty) overrides
    // the scalar fraction per counterfactual action.
    double availability_fraction = 1.0;
    std::vector<double> per_action_fraction;
    // optional hard mask over (state, action) pairs, row-major [s][a]
    std::vector<uint8_t> pair_mask;
    uint64_t seed = 0;
};

struct StepAnnotations {
    std::vector<uint8_t> available;  // [action]; the factual slot stays false
    std::vector<double> value;       // [action]; meaningful only where available
};

struct AnnotatedTrajectory {
    Trajectory base;
    std::vector<StepAnnotations> annotations;  // one per step
};

using AnnotatedDataset = std::vector<AnnotatedTrajectory>;

struct WeightScheme {
    enum Kind {
        equal_split,       // uniform over {factual} + available counterfactuals
        constant_vector,   // fixed per-action vector renormalized over that set
        constant_factual,  // fixed factual weight per factual action; remainder
                           // split equally over available counterfactuals
        random_uniform,    // factual weight ~ U(center-width/2, center+width/2)
        factual_only
    };
    Kind kind = equal_split;
    std::vector<double> vector_weights;   // constant_vector
    std::vector<double> factual_weights;  // constant_factual, indexed by factual action
    double center = 0.5;
    double width = 0.0;
    uint64_t seed = 0;
};

struct WeightedDataset {
    AnnotatedDataset trajectories;
    // weights[i][t][action]; nonnegative, sum to 1, zero on unavailable actions
    std::vector<std::vector<std::vector<double>>> weights;
};

struct AvgWeightTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> mean;    // [s][a][a~]  W-bar(a~ | s, a)
    std::vector<double> cov;     // [s][a][ai][aj]
    std::vector<int64_t> counts; // [s][a]

    double wbar(int s, int a, int at) const {
        return mean[(size_t(s) * num_actions + a) * num_actions + at];
    }
    double wcov(int s, int a, int ai, int aj) const {
        return cov[((size_t(s) * num_actions + a) * num_actions + ai) * num_actions + aj];
    }
    double wvar(int s, int a, int at) const { return wcov(s, a, at, at); }
    int64_t count(int s, int a) const { return counts[size_t(s) * num_actions + a]; }

    double& wbar_at(int s, int a, int at) {
        return mean[(size_t(s) * num_actions + a) * num_actions + at];
    }
    double& wcov_at(int s, int a, int ai, int aj) {
        return cov[((size_t(s) * num_actions + a) * num_actions + ai) * num_actions + aj];
    }

    void init(int S, int A) {
        num_states = S;
        num_actions = A;
        mean.assign(size_t(S) * A * A, 0.0);
        cov.assign(size_t(S) * A * A * A, 0.0);
        counts.assign(size_t(S) * A, 0);
    }
};

struct ApproxMDP {
    TabularMDP model;                 // empirical transitions/rewards; template dims
    std::vector<uint8_t> supported;   // [s][a]
    std::vector<int64_t> visit_counts;  // [s][a]

    bool is_supported(int s, int a) const {
        return supported[size_t(s) * model.num_actions + a] != 0;
    }
};

AnnotatedDataset annotate(const Dataset& dataset, const TabularMDP& mdp,
                          const Policy* pi_e, const Policy* pi_b,
                          const AnnotationSpec& spec);

// same availability/noise mechanics, but annotation means come from a caller
// supplied horizon-indexed Q table (spec.source is ignored)
AnnotatedDataset annotate_from_q(const Dataset& dataset, const QTable& q,
                                 const AnnotationSpec& spec);

WeightedDataset assign_weights(const AnnotatedDataset& annotated, const WeightScheme& scheme);

AvgWeightTable average_weights(const WeightedDataset& wd, int num_states, int num_actions);

// pi_b+(a~|s) = sum_a pi_b(a|s) W-bar(a~|s,a).  States with no data copy pi_b;
// unseen (s,a) rows contribute their mass to the factual action.
Policy augmented_policy(const AvgWeightTable& wbar, const Policy& pi_b);

// exact average-weight moments for schemes whose weight distribution does not
// depend on the data (used by the closed-form calculators and sweep kernels);
// avail_prob[a~] is the marginal availability probability per counterfactual
// action (draws independent across actions)
AvgWeightTable scheme_weight_moments(int num_states, int num_actions,
                                     const WeightScheme& scheme,
                                     std::span<const double> avail_prob);

ApproxMDP fit_approximate_mdp(const Dataset& dataset, const TabularMDP& template_mdp);

AnnotatedDataset correct_bias(const AnnotatedDataset& annotated, const ApproxMDP& mhat,
                              const Policy& pi_b, const Policy& pi_e);

AnnotatedDataset impute_missing(const AnnotatedDataset& annotated);

}  // namespace semiope
