#pragma once

#include <span>
#include <string>
#include <vector>

#include "semiope/mdp.hpp"

namespace semiope {

struct BanditSpec {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> reward_means;  // [state][action]
    std::vector<double> reward_stds;   // [state][action]
    std::vector<double> state_probs;   // [state]
};

TabularMDP make_bandit(const BanditSpec& spec);
TabularMDP make_two_state_bandit(const BanditSpec& spec);
TabularMDP make_one_state_bandit(double r0, double r1, double s0, double s1);

// Deterministic tree: every non-leaf node has `branching` actions leading to
// its children; the transition into a leaf carries that leaf's reward; leaves
// route to an absorbing sink.
TabularMDP make_tree_mdp(int depth, int branching, std::span<const double> leaf_rewards);

Policy optimal_policy(const TabularMDP& mdp);
Policy eps_greedy(const Policy& base, double eps);
Policy perturb_policy(const Policy& optimal, int flip_count, RngStream& rng);

struct LabeledPolicy {
    std::string label;
    int flip_count = 0;
    uint64_t seed = 0;
    Policy policy;
};

std::vector<LabeledPolicy> make_policy_set(const Policy& optimal,
                                           std::span<const int> flip_counts,
                                           int seeds_per_count, uint64_t master_seed);

std::vector<Dataset> generate_datasets(const TabularMDP& mdp, const Policy& behavior,
                                       int n_datasets, int n_episodes, uint64_t master_seed);

}  // namespace semiope
