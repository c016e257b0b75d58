#include "semiope/environments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace semiope {

TabularMDP make_bandit(const BanditSpec& spec) {
    const int S = spec.num_states, A = spec.num_actions;
    if (S <= 0 || A <= 0) throw std::invalid_argument("bandit dimensions must be positive");
    if (spec.reward_means.size() != size_t(S) * A || spec.reward_stds.size() != size_t(S) * A ||
        spec.state_probs.size() != size_t(S))
        throw std::invalid_argument("bandit table size mismatch");
    TabularMDP mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.horizon = 1;
    mdp.discount = 1.0;
    mdp.allocate();
    mdp.reward_mean = spec.reward_means;
    mdp.reward_std = spec.reward_stds;
    mdp.initial_dist = spec.state_probs;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) mdp.p_at(s, a, s) = 1.0;  // horizon 1, successor unused
    mdp.validate();
    return mdp;
}

TabularMDP make_two_state_bandit(const BanditSpec& spec) {
    if (spec.num_states != 2 || spec.num_actions != 2)
        throw std::invalid_argument("two-state bandit requires 2 states and 2 actions");
    return make_bandit(spec);
}

TabularMDP make_one_state_bandit(double r0, double r1, double s0, double s1) {
    if (s0 < 0.0 || s1 < 0.0) throw std::invalid_argument("negative reward std");
    BanditSpec spec;
    spec.num_states = 1;
    spec.num_actions = 2;
    spec.reward_means = {r0, r1};
    spec.reward_stds = {s0, s1};
    spec.state_probs = {1.0};
    return make_bandit(spec);
}

TabularMDP make_tree_mdp(int depth, int branching, std::span<const double> leaf_rewards) {
    if (depth <= 0 || branching <= 0) throw std::invalid_argument("tree dimensions must be positive");
    size_t n_leaves = 1;
    for (int d = 0; d < depth; ++d) n_leaves *= branching;
    if (leaf_rewards.size() != n_leaves)
        throw std::invalid_argument("leaf reward vector length mismatch");

    // nodes in breadth-first order; level d starts at (b^d - 1)/(b - 1)
    size_t n_nodes = 0, level = 1;
    std::vector<size_t> level_start(depth + 1);
    for (int d = 0; d <= depth; ++d) {
        level_start[d] = n_nodes;
        n_nodes += level;
        level *= branching;
    }
    const int S = int(n_nodes) + 1;  // plus absorbing sink
    const int sink = S - 1;

    TabularMDP mdp;
    mdp.num_states = S;
    mdp.num_actions = branching;
    mdp.horizon = depth;
    mdp.discount = 1.0;
    mdp.allocate();
    mdp.initial_dist[0] = 1.0;
    mdp.terminal[sink] = 1;
    for (int a = 0; a < branching; ++a) mdp.p_at(sink, a, sink) = 1.0;

    for (int d = 0; d < depth; ++d) {
        size_t count = 1;
        for (int k = 0; k < d; ++k) count *= branching;
        for (size_t i = 0; i < count; ++i) {
            int node = int(level_start[d] + i);
            for (int a = 0; a < branching; ++a) {
                int child = int(level_start[d + 1] + i * branching + a);
                mdp.p_at(node, a, child) = 1.0;
                if (d == depth - 1)
                    mdp.reward_mean[size_t(node) * branching + a] =
                        leaf_rewards[i * branching + a];
            }
        }
    }
    // leaves absorb into the sink
    size_t leaf0 = level_start[depth];
    for (size_t i = 0; i < n_leaves; ++i) {
        int node = int(leaf0 + i);
        for (int a = 0; a < branching; ++a) mdp.p_at(node, a, sink) = 1.0;
    }
    mdp.validate();
    return mdp;
}

Policy optimal_policy(const TabularMDP& mdp) {
    const int S = mdp.num_states, A = mdp.num_actions, T = mdp.horizon;
    // backward induction with the greedy backup; the resulting stationary
    // policy is greedy with respect to the full-horizon optimal Q
    std::vector<double> vnext(S, 0.0), q(A);
    std::vector<double> q0(size_t(S) * A, 0.0);
    for (int t = T - 1; t >= 0; --t) {
        std::vector<double> v(S, 0.0);
        for (int s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) continue;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                double qa = mdp.rmean(s, a);
                if (t < T - 1 && mdp.discount > 0.0) {
                    double fut = 0.0;
                    for (int s2 = 0; s2 < S; ++s2) {
                        double pr = mdp.p(s, a, s2);
                        if (pr > 0.0) fut += pr * vnext[s2];
                    }
                    qa += mdp.discount * fut;
                }
                if (t == 0) q0[size_t(s) * A + a] = qa;
                if (qa > best) best = qa;
            }
            v[s] = best;
        }
        vnext = v;
    }
    Policy pi(S, A);
    for (int s = 0; s < S; ++s) {
        int best = 0;
        for (int a = 1; a < A; ++a)
            if (q0[size_t(s) * A + a] > q0[size_t(s) * A + best]) best = a;
        pi.at(s, best) = 1.0;
    }
    return pi;
}

Policy eps_greedy(const Policy& base, double eps) {
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("eps must be in [0,1]");
    if (!base.is_deterministic())
        throw std::invalid_argument("eps_greedy requires a deterministic base policy");
    const int S = base.num_states, A = base.num_actions;
    Policy pi(S, A);
    for (int s = 0; s < S; ++s) {
        int a_star = base.argmax_action(s);
        for (int a = 0; a < A; ++a)
            pi.at(s, a) = (a == a_star) ? 1.0 - eps + eps / A : eps / A;
    }
    return pi;
}

Policy perturb_policy(const Policy& optimal, int flip_count, RngStream& rng) {
    if (!optimal.is_deterministic())
        throw std::invalid_argument("perturb_policy requires a deterministic policy");
    const int S = optimal.num_states, A = optimal.num_actions;
    if (flip_count < 0 || flip_count > S) throw std::invalid_argument("flip_count out of range");
    std::vector<int> idx(S);
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: first flip_count entries are a uniform subset
    for (int i = 0; i < flip_count; ++i) {
        int j = i + rng.next_int(S - i);
        std::swap(idx[i], idx[j]);
    }
    Policy pi = optimal;
    for (int i = 0; i < flip_count; ++i) {
        int s = idx[i];
        int a_star = optimal.argmax_action(s);
        int repl;
        if (A == 2) {
            repl = 1 - a_star;
        } else {
            repl = rng.next_int(A - 1);
            if (repl >= a_star) ++repl;
        }
        for (int a = 0; a < A; ++a) pi.at(s, a) = (a == repl) ? 1.0 : 0.0;
    }
    return pi;
}

std::vector<LabeledPolicy> make_policy_set(const Policy& optimal,
                                           std::span<const int> flip_counts,
                                           int seeds_per_count, uint64_t master_seed) {
    std::vector<LabeledPolicy> out;
    out.push_back({"optimal", 0, 0, optimal});
    for (int fc : flip_counts)
        for (int k = 0; k < seeds_per_count; ++k) {
            RngStream rng = RngStream::derive(master_seed, "policy_flip",
                                              {uint64_t(fc), uint64_t(k)});
            LabeledPolicy lp;
            lp.label = "flip" + std::to_string(fc) + "_seed" + std::to_string(k);
            lp.flip_count = fc;
            lp.seed = uint64_t(k);
            lp.policy = perturb_policy(optimal, fc, rng);
            out.push_back(std::move(lp));
        }
    return out;
}

std::vector<Dataset> generate_datasets(const TabularMDP& mdp, const Policy& behavior,
                                       int n_datasets, int n_episodes, uint64_t master_seed) {
    if (n_datasets <= 0 || n_episodes <= 0)
        throw std::invalid_argument("dataset counts must be positive");
    std::vector<Dataset> out(n_datasets);
    for (int d = 0; d < n_datasets; ++d) {
        out[d].reserve(n_episodes);
        for (int e = 0; e < n_episodes; ++e) {
            RngStream rng = RngStream::derive(master_seed, "episode",
                                              {uint64_t(d), uint64_t(e)});
            out[d].push_back(sample_trajectory(mdp, behavior, rng));
        }
    }
    return out;
}

}  // namespace semiope
