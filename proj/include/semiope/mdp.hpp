#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiope/rng.hpp"

namespace semiope {

struct SupportViolation : std::runtime_error {
    int state = -1, action = -1, t = -1;
    SupportViolation(const std::string& what, int s, int a, int t_)
        : std::runtime_error(what), state(s), action(a), t(t_) {}
};

struct Policy {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> probs;  // row-major [state][action]

    Policy() = default;
    Policy(int S, int A) : num_states(S), num_actions(A), probs(size_t(S) * A, 0.0) {}

    double operator()(int s, int a) const { return probs[size_t(s) * num_actions + a]; }
    double& at(int s, int a) { return probs[size_t(s) * num_actions + a]; }
    std::span<const double> row(int s) const {
        return {probs.data() + size_t(s) * num_actions, size_t(num_actions)};
    }

    bool is_deterministic() const;
    int argmax_action(int s) const;
    void validate() const;
};

// Finite-horizon tabular MDP.  Rewards are Normal(reward_mean, reward_std) per
// (s, a), except in entry-reward mode where the realized reward of a step is
// the deterministic entry reward of the sampled next state (used for episodic
// environments whose outcome is decided by which terminal state is reached);
// reward_mean is then the exact expectation over next states, so all dynamic
// programming is unchanged.
struct TabularMDP {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> transition;    // [s][a][s2]
    std::vector<double> reward_mean;   // [s][a]
    std::vector<double> reward_std;    // [s][a]
    std::vector<double> initial_dist;  // [s]
    double discount = 1.0;
    int horizon = 1;
    std::vector<uint8_t> terminal;     // [s], absorbing with zero reward

    bool reward_on_entry = false;
    std::vector<double> entry_reward;  // [s2], only used when reward_on_entry

    double p(int s, int a, int s2) const {
        return transition[(size_t(s) * num_actions + a) * num_states + s2];
    }
    double& p_at(int s, int a, int s2) {
        return transition[(size_t(s) * num_actions + a) * num_states + s2];
    }
    double rmean(int s, int a) const { return reward_mean[size_t(s) * num_actions + a]; }
    double rstd(int s, int a) const { return reward_std[size_t(s) * num_actions + a]; }
    bool is_terminal(int s) const { return terminal[s] != 0; }
    bool is_bandit() const { return horizon == 1; }

    void allocate();                   // sizes all tables from dims
    void finalize_entry_rewards();     // reward_mean(s,a) = sum_s2 p(s2|s,a) entry_reward(s2)
    void validate() const;
};

struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
};

struct Trajectory {
    std::vector<Step> steps;
    int final_state = -1;  // successor of the last step (terminal or truncation state)

    double total_reward() const {
        double s = 0.0;
        for (const auto& st : steps) s += st.reward;
        return s;
    }
};

using Dataset = std::vector<Trajectory>;

// Q-values of the remaining horizon: values[t] is Q over the reward-to-go from
// step t (0-based), discounted relative to t.
struct QTable {
    int horizon = 0;
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> values;  // [t][s][a]

    double q(int t, int s, int a) const {
        return values[(size_t(t) * num_states + s) * num_actions + a];
    }
    double& q_at(int t, int s, int a) {
        return values[(size_t(t) * num_states + s) * num_actions + a];
    }
};

struct OccupancyTable {
    int horizon = 0;
    int num_states = 0;
    std::vector<double> dist;  // [t][s]

    double d(int t, int s) const { return dist[size_t(t) * num_states + s]; }
    double& d_at(int t, int s) { return dist[size_t(t) * num_states + s]; }
};

QTable horizon_q_values(const TabularMDP& mdp, const Policy& policy);

// V at step 0 for every state, derived from a QTable
std::vector<double> initial_state_values(const QTable& q, const Policy& policy);

double exact_policy_value(const TabularMDP& mdp, const Policy& policy);

Trajectory sample_trajectory(const TabularMDP& mdp, const Policy& policy, RngStream& rng);

OccupancyTable state_occupancy(const TabularMDP& mdp, const Policy& policy);

std::vector<double> time_averaged_occupancy(const TabularMDP& mdp, const Policy& policy);

// Returns +infinity when pi_e puts mass where pi_b has none under a weighted state.
double policy_kl(const Policy& pi_e, const Policy& pi_b, std::span<const double> state_weights);

double compensated_sum(std::span<const double> xs);
double mean_of(std::span<const double> xs);
// population variance (divides by n)
double variance_of(std::span<const double> xs);

}  // namespace semiope
