#include "semiope/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace semiope {

namespace {

template <typename ValueFn>
AnnotatedDataset annotate_core(const Dataset& dataset, int A, const AnnotationSpec& spec,
                               ValueFn&& value_of) {
    if (spec.noise_std < 0.0) throw std::invalid_argument("noise_std must be nonnegative");
    if (spec.availability_fraction < 0.0 || spec.availability_fraction > 1.0)
        throw std::invalid_argument("availability fraction must be in [0,1]");
    if (!spec.per_action_fraction.empty() && spec.per_action_fraction.size() != size_t(A))
        throw std::invalid_argument("per-action fraction size mismatch");

    AnnotatedDataset out;
    out.reserve(dataset.size());
    for (size_t i = 0; i < dataset.size(); ++i) {
        AnnotatedTrajectory at;
        at.base = dataset[i];
        at.annotations.resize(at.base.steps.size());
        for (size_t t = 0; t < at.base.steps.size(); ++t) {
            const Step& st = at.base.steps[t];
            StepAnnotations& ann = at.annotations[t];
            ann.available.assign(A, 0);
            ann.value.assign(A, 0.0);
            for (int a = 0; a < A; ++a) {
                if (a == st.action) continue;
                if (!spec.pair_mask.empty() &&
                    spec.pair_mask[size_t(st.state) * A + a] == 0)
                    continue;
                double frac = spec.per_action_fraction.empty()
                                  ? spec.availability_fraction
                                  : spec.per_action_fraction[a];
                RngStream rng = RngStream::derive(spec.seed, "annotation",
                                                  {uint64_t(i), uint64_t(t), uint64_t(a)});
                if (!rng.next_bernoulli(frac)) continue;
                double g = value_of(int(t), st.state, a);
                if (spec.noise_std > 0.0) g += spec.noise_std * rng.next_normal();
                ann.available[a] = 1;
                ann.value[a] = g;
            }
        }
        out.push_back(std::move(at));
    }
    return out;
}

}  // namespace

AnnotatedDataset annotate(const Dataset& dataset, const TabularMDP& mdp,
                          const Policy* pi_e, const Policy* pi_b,
                          const AnnotationSpec& spec) {
    QTable qt;
    if (spec.source == AnnotationSource::q_eval) {
        if (!pi_e) throw std::invalid_argument("q_eval source requires the evaluation policy");
        qt = horizon_q_values(mdp, *pi_e);
    } else if (spec.source == AnnotationSource::q_behavior) {
        if (!pi_b) throw std::invalid_argument("q_behavior source requires the behavior policy");
        qt = horizon_q_values(mdp, *pi_b);
    }
    if (spec.source == AnnotationSource::reward_mean)
        return annotate_core(dataset, mdp.num_actions, spec,
                             [&](int, int s, int a) { return mdp.rmean(s, a); });
    return annotate_core(dataset, mdp.num_actions, spec,
                         [&](int t, int s, int a) { return qt.q(t, s, a); });
}

AnnotatedDataset annotate_from_q(const Dataset& dataset, const QTable& q,
                                 const AnnotationSpec& spec) {
    return annotate_core(dataset, q.num_actions, spec,
                         [&](int t, int s, int a) { return q.q(t, s, a); });
}

namespace {

std::vector<double> step_weights(const WeightScheme& scheme, int A, int factual,
                                 const std::vector<uint8_t>& available, RngStream* rng) {
    std::vector<double> w(A, 0.0);
    int k = 0;
    for (int a = 0; a < A; ++a)
        if (a != factual && available[a]) ++k;

    switch (scheme.kind) {
        case WeightScheme::factual_only:
            w[factual] = 1.0;
            break;
        case WeightScheme::equal_split: {
            double each = 1.0 / double(k + 1);
            w[factual] = each;
            for (int a = 0; a < A; ++a)
                if (a != factual && available[a]) w[a] = each;
            break;
        }
        case WeightScheme::constant_vector: {
            if (scheme.vector_weights.size() != size_t(A))
                throw std::invalid_argument("constant weight vector size mismatch");
            double mass = scheme.vector_weights[factual];
            for (int a = 0; a < A; ++a)
                if (a != factual && available[a]) mass += scheme.vector_weights[a];
            if (mass <= 0.0)
                throw std::invalid_argument("constant weight vector has zero mass on available set");
            w[factual] = scheme.vector_weights[factual] / mass;
            for (int a = 0; a < A; ++a)
                if (a != factual && available[a]) w[a] = scheme.vector_weights[a] / mass;
            break;
        }
        case WeightScheme::constant_factual: {
            if (scheme.factual_weights.size() != size_t(A))
                throw std::invalid_argument("factual weight vector size mismatch");
            if (k == 0) {
                w[factual] = 1.0;
            } else {
                double f = scheme.factual_weights[factual];
                w[factual] = f;
                for (int a = 0; a < A; ++a)
                    if (a != factual && available[a]) w[a] = (1.0 - f) / double(k);
            }
            break;
        }
        case WeightScheme::random_uniform: {
            if (k == 0) {
                w[factual] = 1.0;
            } else {
                double f = scheme.center + scheme.width * (rng->next_double() - 0.5);
                f = std::clamp(f, 0.0, 1.0);
                w[factual] = f;
                for (int a = 0; a < A; ++a)
                    if (a != factual && available[a]) w[a] = (1.0 - f) / double(k);
            }
            break;
        }
    }
    return w;
}

}  // namespace

WeightedDataset assign_weights(const AnnotatedDataset& annotated, const WeightScheme& scheme) {
    WeightedDataset wd;
    wd.trajectories = annotated;
    wd.weights.resize(annotated.size());
    for (size_t i = 0; i < annotated.size(); ++i) {
        const auto& traj = annotated[i];
        wd.weights[i].resize(traj.base.steps.size());
        for (size_t t = 0; t < traj.base.steps.size(); ++t) {
            int A = int(traj.annotations[t].available.size());
            RngStream rng = RngStream::derive(scheme.seed, "weight_draw",
                                              {uint64_t(i), uint64_t(t)});
            wd.weights[i][t] = step_weights(scheme, A, traj.base.steps[t].action,
                                            traj.annotations[t].available, &rng);
        }
    }
    return wd;
}

AvgWeightTable average_weights(const WeightedDataset& wd, int num_states, int num_actions) {
    const int A = num_actions;
    AvgWeightTable tab;
    tab.init(num_states, A);
    std::vector<double> sum(size_t(num_states) * A * A, 0.0);
    std::vector<double> sum2(size_t(num_states) * A * A * A, 0.0);

    for (size_t i = 0; i < wd.trajectories.size(); ++i)
        for (size_t t = 0; t < wd.trajectories[i].base.steps.size(); ++t) {
            const Step& st = wd.trajectories[i].base.steps[t];
            const std::vector<double>& w = wd.weights[i][t];
            size_t base = size_t(st.state) * A + st.action;
            tab.counts[base] += 1;
            for (int ai = 0; ai < A; ++ai) {
                sum[base * A + ai] += w[ai];
                for (int aj = 0; aj < A; ++aj)
                    sum2[(base * A + ai) * A + aj] += w[ai] * w[aj];
            }
        }

    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < A; ++a) {
            size_t base = size_t(s) * A + a;
            int64_t n = tab.counts[base];
            if (n == 0) continue;
            for (int ai = 0; ai < A; ++ai) tab.wbar_at(s, a, ai) = sum[base * A + ai] / double(n);
            for (int ai = 0; ai < A; ++ai)
                for (int aj = 0; aj < A; ++aj)
                    tab.wcov_at(s, a, ai, aj) =
                        sum2[(base * A + ai) * A + aj] / double(n) -
                        tab.wbar(s, a, ai) * tab.wbar(s, a, aj);
        }
    return tab;
}

Policy augmented_policy(const AvgWeightTable& wbar, const Policy& pi_b) {
    if (wbar.num_states != pi_b.num_states || wbar.num_actions != pi_b.num_actions)
        throw std::invalid_argument("weight table dimensions do not match policy");
    const int S = pi_b.num_states, A = pi_b.num_actions;
    Policy out(S, A);
    for (int s = 0; s < S; ++s) {
        bool any = false;
        for (int a = 0; a < A; ++a)
            if (wbar.count(s, a) > 0) any = true;
        if (!any) {
            for (int a = 0; a < A; ++a) out.at(s, a) = pi_b(s, a);
            continue;
        }
        for (int a = 0; a < A; ++a) {
            double pb = pi_b(s, a);
            if (pb == 0.0) continue;
            if (wbar.count(s, a) > 0) {
                for (int at = 0; at < A; ++at) out.at(s, at) += pb * wbar.wbar(s, a, at);
            } else {
                out.at(s, a) += pb;  // no weight data: all mass stays factual
            }
        }
    }
    return out;
}

AvgWeightTable scheme_weight_moments(int num_states, int num_actions,
                                     const WeightScheme& scheme,
                                     std::span<const double> avail_prob) {
    const int A = num_actions;
    if (avail_prob.size() != size_t(A))
        throw std::invalid_argument("availability probability vector size mismatch");
    AvgWeightTable tab;
    tab.init(num_states, A);

    for (int a = 0; a < A; ++a) {
        std::vector<double> m(A, 0.0);
        std::vector<double> m2(size_t(A) * A, 0.0);
        // enumerate availability subsets of the counterfactual actions
        std::vector<int> cf;
        for (int at = 0; at < A; ++at)
            if (at != a) cf.push_back(at);
        int n_cf = int(cf.size());
        for (int mask = 0; mask < (1 << n_cf); ++mask) {
            double pmask = 1.0;
            std::vector<uint8_t> avail(A, 0);
            for (int j = 0; j < n_cf; ++j) {
                bool on = mask & (1 << j);
                pmask *= on ? avail_prob[cf[j]] : 1.0 - avail_prob[cf[j]];
                if (on) avail[cf[j]] = 1;
            }
            if (pmask == 0.0) continue;
            int k = 0;
            for (int j = 0; j < n_cf; ++j)
                if (avail[cf[j]]) ++k;

            // conditional first/second moments of the weight vector
            std::vector<double> cm(A, 0.0);
            std::vector<double> cm2(size_t(A) * A, 0.0);
            double fvar = 0.0;  // variance of the factual weight
            if (scheme.kind == WeightScheme::random_uniform && k > 0) {
                cm[a] = scheme.center;
                fvar = scheme.width * scheme.width / 12.0;
            } else {
                RngStream dummy(0);
                std::vector<double> w = step_weights(scheme, A, a, avail, &dummy);
                for (int ai = 0; ai < A; ++ai) cm[ai] = w[ai];
            }
            if (scheme.kind == WeightScheme::random_uniform && k > 0)
                for (int j = 0; j < n_cf; ++j)
                    if (avail[cf[j]]) cm[cf[j]] = (1.0 - cm[a]) / double(k);
            for (int ai = 0; ai < A; ++ai)
                for (int aj = 0; aj < A; ++aj) {
                    double cc = 0.0;
                    if (fvar > 0.0) {
                        // counterfactual weights are (1 - w_f)/k, so all
                        // covariances derive from the factual variance
                        double si = (ai == a) ? 1.0 : (avail[ai] ? -1.0 / double(k) : 0.0);
                        double sj = (aj == a) ? 1.0 : (avail[aj] ? -1.0 / double(k) : 0.0);
                        cc = si * sj * fvar;
                    }
                    cm2[size_t(ai) * A + aj] = cm[ai] * cm[aj] + cc;
                }
            for (int ai = 0; ai < A; ++ai) {
                m[ai] += pmask * cm[ai];
                for (int aj = 0; aj < A; ++aj)
                    m2[size_t(ai) * A + aj] += pmask * cm2[size_t(ai) * A + aj];
            }
        }
        for (int s = 0; s < num_states; ++s) {
            tab.counts[size_t(s) * A + a] = 1;
            for (int ai = 0; ai < A; ++ai) {
                tab.wbar_at(s, a, ai) = m[ai];
                for (int aj = 0; aj < A; ++aj)
                    tab.wcov_at(s, a, ai, aj) =
                        m2[size_t(ai) * A + aj] - m[ai] * m[aj];
            }
        }
    }
    return tab;
}

ApproxMDP fit_approximate_mdp(const Dataset& dataset, const TabularMDP& template_mdp) {
    if (dataset.empty()) throw std::invalid_argument("cannot fit a model to an empty dataset");
    const int S = template_mdp.num_states, A = template_mdp.num_actions;
    ApproxMDP out;
    out.model.num_states = S;
    out.model.num_actions = A;
    out.model.horizon = template_mdp.horizon;
    out.model.discount = template_mdp.discount;
    out.model.allocate();
    out.model.initial_dist = template_mdp.initial_dist;
    out.model.terminal = template_mdp.terminal;
    out.supported.assign(size_t(S) * A, 0);
    out.visit_counts.assign(size_t(S) * A, 0);

    std::vector<double> rsum(size_t(S) * A, 0.0);
    for (const Trajectory& traj : dataset)
        for (size_t t = 0; t < traj.steps.size(); ++t) {
            const Step& st = traj.steps[t];
            int s2 = (t + 1 < traj.steps.size()) ? traj.steps[t + 1].state : traj.final_state;
            if (s2 < 0) continue;  // successor unknown (legacy data); skip
            size_t base = size_t(st.state) * A + st.action;
            out.visit_counts[base] += 1;
            rsum[base] += st.reward;
            out.model.p_at(st.state, st.action, s2) += 1.0;
        }

    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            size_t base = size_t(s) * A + a;
            if (template_mdp.is_terminal(s)) {
                for (int s2 = 0; s2 < S; ++s2) out.model.p_at(s, a, s2) = 0.0;
                out.model.p_at(s, a, s) = 1.0;
                out.model.reward_mean[base] = 0.0;
                continue;
            }
            int64_t n = out.visit_counts[base];
            if (n == 0) {
                out.model.p_at(s, a, s) = 1.0;  // unsupported: self-loop, zero reward
                continue;
            }
            out.supported[base] = 1;
            for (int s2 = 0; s2 < S; ++s2) out.model.p_at(s, a, s2) /= double(n);
            out.model.reward_mean[base] = rsum[base] / double(n);
        }
    return out;
}

AnnotatedDataset correct_bias(const AnnotatedDataset& annotated, const ApproxMDP& mhat,
                              const Policy& pi_b, const Policy& pi_e) {
    QTable qb = horizon_q_values(mhat.model, pi_b);
    QTable qe = horizon_q_values(mhat.model, pi_e);
    AnnotatedDataset out = annotated;
    for (auto& traj : out) {
        if (int(traj.base.steps.size()) > qb.horizon)
            throw std::invalid_argument("trajectory longer than the model horizon");
        for (size_t t = 0; t < traj.base.steps.size(); ++t) {
            const Step& st = traj.base.steps[t];
            StepAnnotations& ann = traj.annotations[t];
            for (size_t a = 0; a < ann.available.size(); ++a) {
                if (!ann.available[a]) continue;
                if (!mhat.is_supported(st.state, int(a))) continue;
                ann.value[a] -= qb.q(int(t), st.state, int(a)) - qe.q(int(t), st.state, int(a));
            }
        }
    }
    return out;
}

AnnotatedDataset impute_missing(const AnnotatedDataset& annotated) {
    // pooled mean of observed annotations per (state, counterfactual action)
    struct Acc {
        double sum = 0.0;
        int64_t n = 0;
    };
    std::unordered_map<int64_t, Acc> pool;
    auto key = [](int s, int a) { return int64_t(s) * 4096 + a; };
    for (const auto& traj : annotated)
        for (size_t t = 0; t < traj.base.steps.size(); ++t) {
            const StepAnnotations& ann = traj.annotations[t];
            int s = traj.base.steps[t].state;
            for (size_t a = 0; a < ann.available.size(); ++a)
                if (ann.available[a]) {
                    Acc& acc = pool[key(s, int(a))];
                    acc.sum += ann.value[a];
                    acc.n += 1;
                }
        }

    AnnotatedDataset out = annotated;
    for (auto& traj : out)
        for (size_t t = 0; t < traj.base.steps.size(); ++t) {
            StepAnnotations& ann = traj.annotations[t];
            int s = traj.base.steps[t].state;
            int factual = traj.base.steps[t].action;
            for (size_t a = 0; a < ann.available.size(); ++a) {
                if (int(a) == factual || ann.available[a]) continue;
                auto it = pool.find(key(s, int(a)));
                if (it == pool.end()) continue;
                ann.available[a] = 1;
                ann.value[a] = it->second.sum / double(it->second.n);
            }
        }
    return out;
}

}  // namespace semiope
