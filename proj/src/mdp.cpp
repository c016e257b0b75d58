#include "semiope/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semiope {

namespace {
constexpr double kRowTol = 1e-9;
}

bool Policy::is_deterministic() const {
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            double p = (*this)(s, a);
            if (p != 0.0 && p != 1.0) return false;
        }
    return true;
}

int Policy::argmax_action(int s) const {
    int best = 0;
    double bp = (*this)(s, 0);
    for (int a = 1; a < num_actions; ++a)
        if ((*this)(s, a) > bp) {
            bp = (*this)(s, a);
            best = a;
        }
    return best;
}

void Policy::validate() const {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("policy dimensions must be positive");
    if (probs.size() != size_t(num_states) * num_actions)
        throw std::invalid_argument("policy table size mismatch");
    for (int s = 0; s < num_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < num_actions; ++a) {
            double p = (*this)(s, a);
            if (p < 0.0) throw std::invalid_argument("negative policy probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowTol)
            throw std::invalid_argument("policy row does not sum to 1");
    }
}

void TabularMDP::allocate() {
    transition.assign(size_t(num_states) * num_actions * num_states, 0.0);
    reward_mean.assign(size_t(num_states) * num_actions, 0.0);
    reward_std.assign(size_t(num_states) * num_actions, 0.0);
    initial_dist.assign(num_states, 0.0);
    terminal.assign(num_states, 0);
    entry_reward.assign(num_states, 0.0);
}

void TabularMDP::finalize_entry_rewards() {
    reward_on_entry = true;
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            double m = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) m += p(s, a, s2) * entry_reward[s2];
            reward_mean[size_t(s) * num_actions + a] = is_terminal(s) ? 0.0 : m;
        }
}

void TabularMDP::validate() const {
    if (num_states <= 0 || num_actions <= 0 || horizon <= 0)
        throw std::invalid_argument("mdp dimensions must be positive");
    if (discount < 0.0 || discount > 1.0)
        throw std::invalid_argument("discount must be in [0,1]");
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                double pr = p(s, a, s2);
                if (pr < 0.0) throw std::invalid_argument("negative transition probability");
                sum += pr;
            }
            if (std::abs(sum - 1.0) > kRowTol)
                throw std::invalid_argument("transition row does not sum to 1");
            if (rstd(s, a) < 0.0) throw std::invalid_argument("negative reward std");
        }
    double isum = 0.0;
    for (double p0 : initial_dist) {
        if (p0 < 0.0) throw std::invalid_argument("negative initial probability");
        isum += p0;
    }
    if (std::abs(isum - 1.0) > kRowTol)
        throw std::invalid_argument("initial distribution does not sum to 1");
    for (int s = 0; s < num_states; ++s)
        if (is_terminal(s)) {
            if (std::abs(p(s, 0, s) - 1.0) > kRowTol)
                throw std::invalid_argument("terminal state must self-loop");
            for (int a = 0; a < num_actions; ++a)
                if (rmean(s, a) != 0.0)
                    throw std::invalid_argument("terminal state must have zero reward");
        }
}

QTable horizon_q_values(const TabularMDP& mdp, const Policy& policy) {
    if (policy.num_states != mdp.num_states || policy.num_actions != mdp.num_actions)
        throw std::invalid_argument("policy dimensions do not match mdp");
    policy.validate();
    const int S = mdp.num_states, A = mdp.num_actions, T = mdp.horizon;

    // sparse successor lists: most rows of large episodic MDPs are sparse
    std::vector<std::pair<int, double>> succ;
    std::vector<size_t> offsets(size_t(S) * A + 1, 0);
    succ.reserve(size_t(S) * A * 2);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            for (int s2 = 0; s2 < S; ++s2) {
                double pr = mdp.p(s, a, s2);
                if (pr > 0.0) succ.emplace_back(s2, pr);
            }
            offsets[size_t(s) * A + a + 1] = succ.size();
        }

    QTable qt;
    qt.horizon = T;
    qt.num_states = S;
    qt.num_actions = A;
    qt.values.assign(size_t(T) * S * A, 0.0);

    std::vector<double> vnext(S, 0.0);
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            if (mdp.is_terminal(s)) {
                for (int a = 0; a < A; ++a) qt.q_at(t, s, a) = 0.0;
                continue;
            }
            for (int a = 0; a < A; ++a) {
                double q = mdp.rmean(s, a);
                if (t < T - 1 && mdp.discount > 0.0) {
                    double fut = 0.0;
                    for (size_t k = offsets[size_t(s) * A + a]; k < offsets[size_t(s) * A + a + 1]; ++k)
                        fut += succ[k].second * vnext[succ[k].first];
                    q += mdp.discount * fut;
                }
                qt.q_at(t, s, a) = q;
            }
        }
        if (t > 0) {
            for (int s = 0; s < S; ++s) {
                double v = 0.0;
                for (int a = 0; a < A; ++a) v += policy(s, a) * qt.q(t, s, a);
                vnext[s] = mdp.is_terminal(s) ? 0.0 : v;
            }
        }
    }
    return qt;
}

std::vector<double> initial_state_values(const QTable& q, const Policy& policy) {
    std::vector<double> v(q.num_states, 0.0);
    for (int s = 0; s < q.num_states; ++s)
        for (int a = 0; a < q.num_actions; ++a) v[s] += policy(s, a) * q.q(0, s, a);
    return v;
}

double exact_policy_value(const TabularMDP& mdp, const Policy& policy) {
    QTable qt = horizon_q_values(mdp, policy);
    std::vector<double> v = initial_state_values(qt, policy);
    double val = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) val += mdp.initial_dist[s] * v[s];
    return val;
}

Trajectory sample_trajectory(const TabularMDP& mdp, const Policy& policy, RngStream& rng) {
    if (policy.num_states != mdp.num_states || policy.num_actions != mdp.num_actions)
        throw std::invalid_argument("policy dimensions do not match mdp");
    const int A = mdp.num_actions, S = mdp.num_states;
    Trajectory traj;
    int s = rng.sample_discrete(mdp.initial_dist);
    for (int t = 0; t < mdp.horizon; ++t) {
        if (mdp.is_terminal(s)) break;
        int a = rng.sample_discrete(policy.row(s));
        int s2 = rng.sample_discrete(
            {mdp.transition.data() + (size_t(s) * A + a) * S, size_t(S)});
        double r;
        if (mdp.reward_on_entry) {
            r = mdp.entry_reward[s2];
        } else {
            double sd = mdp.rstd(s, a);
            r = mdp.rmean(s, a) + (sd > 0.0 ? sd * rng.next_normal() : 0.0);
        }
        traj.steps.push_back({s, a, r});
        s = s2;
    }
    traj.final_state = s;
    return traj;
}

OccupancyTable state_occupancy(const TabularMDP& mdp, const Policy& policy) {
    if (policy.num_states != mdp.num_states || policy.num_actions != mdp.num_actions)
        throw std::invalid_argument("policy dimensions do not match mdp");
    const int S = mdp.num_states, A = mdp.num_actions, T = mdp.horizon;
    OccupancyTable occ;
    occ.horizon = T;
    occ.num_states = S;
    occ.dist.assign(size_t(T) * S, 0.0);
    for (int s = 0; s < S; ++s) occ.d_at(0, s) = mdp.initial_dist[s];
    for (int t = 0; t + 1 < T; ++t)
        for (int s = 0; s < S; ++s) {
            double ds = occ.d(t, s);
            if (ds == 0.0) continue;
            if (mdp.is_terminal(s)) {
                occ.d_at(t + 1, s) += ds;
                continue;
            }
            for (int a = 0; a < A; ++a) {
                double pa = policy(s, a);
                if (pa == 0.0) continue;
                for (int s2 = 0; s2 < S; ++s2) {
                    double pr = mdp.p(s, a, s2);
                    if (pr > 0.0) occ.d_at(t + 1, s2) += ds * pa * pr;
                }
            }
        }
    return occ;
}

std::vector<double> time_averaged_occupancy(const TabularMDP& mdp, const Policy& policy) {
    OccupancyTable occ = state_occupancy(mdp, policy);
    std::vector<double> w(mdp.num_states, 0.0);
    for (int t = 0; t < occ.horizon; ++t)
        for (int s = 0; s < mdp.num_states; ++s) w[s] += occ.d(t, s) / occ.horizon;
    return w;
}

double policy_kl(const Policy& pi_e, const Policy& pi_b, std::span<const double> state_weights) {
    if (pi_e.num_states != pi_b.num_states || pi_e.num_actions != pi_b.num_actions)
        throw std::invalid_argument("policy dimensions mismatch");
    if (state_weights.size() != size_t(pi_e.num_states))
        throw std::invalid_argument("state weight vector size mismatch");
    double kl = 0.0;
    for (int s = 0; s < pi_e.num_states; ++s) {
        double w = state_weights[s];
        if (w == 0.0) continue;
        for (int a = 0; a < pi_e.num_actions; ++a) {
            double pe = pi_e(s, a);
            if (pe == 0.0) continue;
            double pb = pi_b(s, a);
            if (pb == 0.0) return std::numeric_limits<double>::infinity();
            kl += w * pe * std::log(pe / pb);
        }
    }
    return kl;
}

double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty vector");
    return compensated_sum(xs) / double(xs.size());
}

double variance_of(std::span<const double> xs) {
    double m = mean_of(xs);
    double acc = 0.0, c = 0.0;
    for (double x : xs) {
        double d = (x - m) * (x - m) - c;
        double t = acc + d;
        c = (t - acc) - d;
        acc = t;
    }
    return acc / double(xs.size());
}

}  // namespace semiope
