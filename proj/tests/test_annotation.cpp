#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "semiope/annotation.hpp"
#include "semiope/environments.hpp"

using namespace semiope;

namespace {

TabularMDP table_bandit() {
    BanditSpec spec;
    spec.num_states = 2;
    spec.num_actions = 2;
    spec.reward_means = {1.0, 2.0, 1.0, 1.0};
    spec.reward_stds = {0.5, 0.5, 0.5, 0.5};
    spec.state_probs = {0.5, 0.5};
    return make_bandit(spec);
}

Policy mixed_policy(int S, double p0) {
    Policy pi(S, 2);
    for (int s = 0; s < S; ++s) {
        pi.at(s, 0) = p0;
        pi.at(s, 1) = 1.0 - p0;
    }
    return pi;
}

Dataset sample_bandit_data(const TabularMDP& mdp, const Policy& pi, int n, uint64_t seed) {
    Dataset data;
    data.reserve(n);
    for (int i = 0; i < n; ++i) {
        RngStream rng = RngStream::derive(seed, "ep", {uint64_t(i)});
        data.push_back(sample_trajectory(mdp, pi, rng));
    }
    return data;
}

}  // namespace

TEST_CASE("annotation availability endpoints") {
    TabularMDP mdp = table_bandit();
    Policy pb = mixed_policy(2, 0.5);
    Dataset data = sample_bandit_data(mdp, pb, 200, 1);

    AnnotationSpec spec;
    spec.source = AnnotationSource::reward_mean;
    spec.availability_fraction = 0.0;
    AnnotatedDataset none = annotate(data, mdp, nullptr, nullptr, spec);
    for (const auto& traj : none)
        for (const auto& ann : traj.annotations)
            for (uint8_t av : ann.available) CHECK(av == 0);

    spec.availability_fraction = 1.0;
    AnnotatedDataset full = annotate(data, mdp, nullptr, nullptr, spec);
    for (const auto& traj : full)
        for (size_t t = 0; t < traj.annotations.size(); ++t) {
            int factual = traj.base.steps[t].action;
            const auto& ann = traj.annotations[t];
            for (int a = 0; a < 2; ++a) {
                CHECK(ann.available[a] == (a == factual ? 0 : 1));
                if (a != factual)
                    CHECK(ann.value[a] == mdp.rmean(traj.base.steps[t].state, a));
            }
        }
}

TEST_CASE("annotation sources draw from the matching value function") {
    std::vector<double> leaves = {1.0, 3.0, 0.0, 2.0};
    TabularMDP mdp = make_tree_mdp(2, 2, leaves);
    Policy pe = mixed_policy(mdp.num_states, 0.2);
    Policy pb = mixed_policy(mdp.num_states, 0.7);
    Dataset data;
    for (int i = 0; i < 50; ++i) {
        RngStream rng = RngStream::derive(4, "ep", {uint64_t(i)});
        data.push_back(sample_trajectory(mdp, pb, rng));
    }

    QTable qe = horizon_q_values(mdp, pe);
    AnnotationSpec spec;
    spec.source = AnnotationSource::q_eval;
    AnnotatedDataset ann = annotate(data, mdp, &pe, &pb, spec);
    for (size_t i = 0; i < ann.size(); ++i)
        for (size_t t = 0; t < ann[i].annotations.size(); ++t) {
            int s = ann[i].base.steps[t].state;
            for (int a = 0; a < 2; ++a)
                if (ann[i].annotations[t].available[a])
                    CHECK(ann[i].annotations[t].value[a] ==
                          doctest::Approx(qe.q(int(t), s, a)).epsilon(1e-12));
        }

    // annotate_from_q matches the dispatching path exactly
    AnnotatedDataset ann2 = annotate_from_q(data, qe, spec);
    for (size_t i = 0; i < ann.size(); ++i)
        for (size_t t = 0; t < ann[i].annotations.size(); ++t) {
            CHECK(ann[i].annotations[t].available == ann2[i].annotations[t].available);
            CHECK(ann[i].annotations[t].value == ann2[i].annotations[t].value);
        }

    CHECK_THROWS_AS(annotate(data, mdp, nullptr, &pb, spec), std::invalid_argument);
}

TEST_CASE("annotation noise and determinism") {
    TabularMDP mdp = table_bandit();
    Policy pb = mixed_policy(2, 0.5);
    Dataset data = sample_bandit_data(mdp, pb, 4000, 2);

    AnnotationSpec spec;
    spec.source = AnnotationSource::reward_mean;
    spec.noise_std = 0.3;
    spec.seed = 17;
    AnnotatedDataset a1 = annotate(data, mdp, nullptr, nullptr, spec);
    AnnotatedDataset a2 = annotate(data, mdp, nullptr, nullptr, spec);
    double sum = 0.0, sum2 = 0.0;
    int64_t n = 0;
    for (size_t i = 0; i < a1.size(); ++i) {
        const auto& ann = a1[i].annotations[0];
        const Step& st = a1[i].base.steps[0];
        for (int a = 0; a < 2; ++a)
            if (ann.available[a]) {
                CHECK(ann.value[a] == a2[i].annotations[0].value[a]);
                double resid = ann.value[a] - mdp.rmean(st.state, a);
                sum += resid;
                sum2 += resid * resid;
                ++n;
            }
    }
    double mean = sum / n;
    double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(mean == doctest::Approx(0.0).epsilon(0.03).scale(1.0));
    CHECK(sd == doctest::Approx(0.3).epsilon(0.05));

    spec.seed = 18;
    AnnotatedDataset a3 = annotate(data, mdp, nullptr, nullptr, spec);
    CHECK(a3[0].annotations[0].value != a1[0].annotations[0].value);
}

TEST_CASE("pair masks and per-action fractions") {
    TabularMDP mdp = table_bandit();
    Policy pb = mixed_policy(2, 0.5);
    Dataset data = sample_bandit_data(mdp, pb, 6000, 3);

    AnnotationSpec spec;
    spec.source = AnnotationSource::reward_mean;
    spec.pair_mask = {1, 1, 0, 0};  // annotations only at state 0
    AnnotatedDataset ann = annotate(data, mdp, nullptr, nullptr, spec);
    for (const auto& traj : ann) {
        int s = traj.base.steps[0].state;
        for (int a = 0; a < 2; ++a)
            if (traj.annotations[0].available[a]) CHECK(s == 0);
    }

    spec.pair_mask.clear();
    spec.per_action_fraction = {0.2, 0.8};
    ann = annotate(data, mdp, nullptr, nullptr, spec);
    int64_t n0 = 0, avail0 = 0, n1 = 0, avail1 = 0;
    for (const auto& traj : ann) {
        int factual = traj.base.steps[0].action;
        if (factual != 0) {
            ++n0;
            avail0 += traj.annotations[0].available[0];
        }
        if (factual != 1) {
            ++n1;
            avail1 += traj.annotations[0].available[1];
        }
    }
    CHECK(double(avail0) / n0 == doctest::Approx(0.2).epsilon(0.1));
    CHECK(double(avail1) / n1 == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("weight schemes produce simplex rows supported on available slots") {
    TabularMDP mdp = table_bandit();
    Policy pb = mixed_policy(2, 0.5);
    Dataset data = sample_bandit_data(mdp, pb, 500, 5);
    AnnotationSpec spec;
    spec.source = AnnotationSource::reward_mean;
    spec.availability_fraction = 0.6;
    AnnotatedDataset ann = annotate(data, mdp, nullptr, nullptr, spec);

    std::vector<WeightScheme> schemes(5);
    schemes[0].kind = WeightScheme::equal_split;
    schemes[1].kind = WeightScheme::factual_only;
    schemes[2].kind = WeightScheme::constant_vector;
    schemes[2].vector_weights = {0.3, 0.7};
    schemes[3].kind = WeightScheme::constant_factual;
    schemes[3].factual_weights = {0.4, 0.9};
    schemes[4].kind = WeightScheme::random_uniform;
    schemes[4].center = 0.5;
    schemes[4].width = 0.4;
    schemes[4].seed = 9;

    for (const WeightScheme& scheme : schemes) {
        WeightedDataset wd = assign_weights(ann, scheme);
        for (size_t i = 0; i < wd.trajectories.size(); ++i) {
            const auto& traj = wd.trajectories[i];
            int factual = traj.base.steps[0].action;
            const auto& w = wd.weights[i][0];
            double total = 0.0;
            for (int a = 0; a < 2; ++a) {
                CHECK(w[a] >= 0.0);
                if (a != factual && !traj.annotations[0].available[a]) CHECK(w[a] == 0.0);
                total += w[a];
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    // spot-check the deterministic schemes on a fully annotated step
    AnnotationSpec full = spec;
    full.availability_fraction = 1.0;
    AnnotatedDataset annf = annotate(data, mdp, nullptr, nullptr, full);
    WeightedDataset eq = assign_weights(annf, schemes[0]);
    CHECK(eq.weights[0][0][0] == doctest::Approx(0.5));
    WeightedDataset fo = assign_weights(annf, schemes[1]);
    CHECK(fo.weights[0][0][annf[0].base.steps[0].action] == 1.0);
    WeightedDataset cf = assign_weights(annf, schemes[3]);
    int fa = annf[0].base.steps[0].action;
    CHECK(cf.weights[0][0][fa] == doctest::Approx(schemes[3].factual_weights[fa]));
}

TEST_CASE("empirical average weights converge to the scheme moments") {
    TabularMDP mdp = table_bandit();
    Policy pb = mixed_policy(2, 0.5);
    Dataset data = sample_bandit_data(mdp, pb, 60000, 6);
    AnnotationSpec spec;
    spec.source = AnnotationSource::reward_mean;
    spec.availability_fraction = 0.7;
    AnnotatedDataset ann = annotate(data, mdp, nullptr, nullptr, spec);

    WeightScheme scheme;
    scheme.kind = WeightScheme::random_uniform;
    scheme.center = 0.5;
    scheme.width = 0.6;
    scheme.seed = 11;
    WeightedDataset wd = assign_weights(ann, scheme);
    AvgWeightTable emp = average_weights(wd, 2, 2);
    std::vector<double> probs = {0.7, 0.7};
    AvgWeightTable exact = scheme_weight_moments(2, 2, scheme, probs);

    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            for (int ai = 0; ai < 2; ++ai) {
                CHECK(emp.wbar(s, a, ai) ==
                      doctest::Approx(exact.wbar(s, a, ai)).epsilon(0.03).scale(1.0));
                for (int aj = 0; aj < 2; ++aj)
                    CHECK(emp.wcov(s, a, ai, aj) ==
                          doctest::Approx(exact.wcov(s, a, ai, aj)).epsilon(0.05).scale(0.05));
            }
}

TEST_CASE("scheme moments in closed form") {
    WeightScheme eq;
    eq.kind = WeightScheme::equal_split;
    std::vector<double> full = {1.0, 1.0};
    AvgWeightTable tab = scheme_weight_moments(1, 2, eq, full);
    CHECK(tab.wbar(0, 0, 0) == doctest::Approx(0.5));
    CHECK(tab.wbar(0, 0, 1) == doctest::Approx(0.5));
    CHECK(tab.wvar(0, 0, 0) == doctest::Approx(0.0));

    // Bernoulli availability p mixes the k=0 and k=1 branches
    std::vector<double> half = {0.4, 0.4};
    tab = scheme_weight_moments(1, 2, eq, half);
    // factual weight is 1 with prob .6, 1/2 with prob .4 -> mean .8, var .06
    CHECK(tab.wbar(0, 0, 0) == doctest::Approx(0.8));
    CHECK(tab.wbar(0, 0, 1) == doctest::Approx(0.2));
    CHECK(tab.wvar(0, 0, 0) == doctest::Approx(0.06));
    CHECK(tab.wcov(0, 0, 0, 1) == doctest::Approx(-0.06));

    WeightScheme ru;
    ru.kind = WeightScheme::random_uniform;
    ru.center = 0.5;
    ru.width = 1.0;
    tab = scheme_weight_moments(1, 2, ru, full);
    CHECK(tab.wbar(0, 0, 0) == doctest::Approx(0.5));
    CHECK(tab.wvar(0, 0, 0) == doctest::Approx(1.0 / 12.0));
    CHECK(tab.wcov(0, 0, 0, 1) == doctest::Approx(-1.0 / 12.0));
}

TEST_CASE("augmented policy definition") {
    // two actions, behavior [.6,.4]; average weights keep .7 factual
    AvgWeightTable tab;
    tab.init(1, 2);
    tab.counts = {10, 10};
    tab.wbar_at(0, 0, 0) = 0.7;
    tab.wbar_at(0, 0, 1) = 0.3;
    tab.wbar_at(0, 1, 0) = 0.3;
    tab.wbar_at(0, 1, 1) = 0.7;
    Policy pb(1, 2);
    pb.at(0, 0) = 0.6;
    pb.at(0, 1) = 0.4;
    Policy pbp = augmented_policy(tab, pb);
    CHECK(pbp(0, 0) == doctest::Approx(0.6 * 0.7 + 0.4 * 0.3));
    CHECK(pbp(0, 1) == doctest::Approx(0.6 * 0.3 + 0.4 * 0.7));

    // a state with no data copies the behavior policy
    AvgWeightTable empty;
    empty.init(1, 2);
    Policy copy = augmented_policy(empty, pb);
    CHECK(copy(0, 0) == 0.6);

    // an unseen (s,a) row keeps its mass factual
    AvgWeightTable partial;
    partial.init(1, 2);
    partial.counts = {10, 0};
    partial.wbar_at(0, 0, 0) = 0.5;
    partial.wbar_at(0, 0, 1) = 0.5;
    Policy part = augmented_policy(partial, pb);
    CHECK(part(0, 0) == doctest::Approx(0.6 * 0.5));
    CHECK(part(0, 1) == doctest::Approx(0.6 * 0.5 + 0.4));
}

TEST_CASE("approximate mdp fit recovers the generator on abundant data") {
    std::vector<double> leaves = {1.0, 3.0, 0.0, 2.0};
    TabularMDP mdp = make_tree_mdp(2, 2, leaves);
    Policy pb = mixed_policy(mdp.num_states, 0.5);
    Dataset data;
    for (int i = 0; i < 20000; ++i) {
        RngStream rng = RngStream::derive(8, "ep", {uint64_t(i)});
        data.push_back(sample_trajectory(mdp, pb, rng));
    }
    ApproxMDP fit = fit_approximate_mdp(data, mdp);
    CHECK(fit.is_supported(0, 0));
    CHECK(fit.is_supported(0, 1));
    // deterministic transitions recovered exactly, rewards to MC accuracy
    CHECK(fit.model.p(0, 0, 1) == doctest::Approx(1.0));
    CHECK(fit.model.rmean(1, 1) == doctest::Approx(mdp.rmean(1, 1)).epsilon(0.05).scale(1.0));
    double vfit = exact_policy_value(fit.model, pb);
    double vtrue = exact_policy_value(mdp, pb);
    CHECK(vfit == doctest::Approx(vtrue).epsilon(0.03));

    // unsupported pairs self-loop with zero reward
    bool found_unsupported = false;
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < 2; ++a)
            if (!fit.is_supported(s, a)) {
                found_unsupported = true;
                CHECK(fit.model.p(s, a, s) == 1.0);
                CHECK(fit.model.rmean(s, a) == 0.0);
            }
    // leaves and the sink are never acted on in depth-2 episodes
    CHECK(found_unsupported);
}

TEST_CASE("bias correction moves behavior annotations toward evaluation values") {
    std::vector<double> leaves = {1.0, 3.0, 0.0, 2.0};
    TabularMDP mdp = make_tree_mdp(2, 2, leaves);
    Policy pb = mixed_policy(mdp.num_states, 0.5);
    Policy pe = mixed_policy(mdp.num_states, 0.1);
    Dataset data;
    for (int i = 0; i < 20000; ++i) {
        RngStream rng = RngStream::derive(8, "ep", {uint64_t(i)});
        data.push_back(sample_trajectory(mdp, pb, rng));
    }

    AnnotationSpec spec;
    spec.source = AnnotationSource::q_behavior;
    AnnotatedDataset ann = annotate(data, mdp, &pe, &pb, spec);
    ApproxMDP fit = fit_approximate_mdp(data, mdp);
    AnnotatedDataset fixed = correct_bias(ann, fit, pb, pe);

    QTable qe = horizon_q_values(mdp, pe);
    double worst = 0.0;
    for (size_t i = 0; i < fixed.size(); ++i)
        for (size_t t = 0; t < fixed[i].annotations.size(); ++t) {
            int s = fixed[i].base.steps[t].state;
            for (int a = 0; a < 2; ++a)
                if (fixed[i].annotations[t].available[a] && fit.is_supported(s, a))
                    worst = std::max(worst, std::abs(fixed[i].annotations[t].value[a] -
                                                     qe.q(int(t), s, a)));
        }
    CHECK(worst < 0.1);
}

TEST_CASE("imputation fills gaps with the pooled mean and leaves the rest alone") {
    TabularMDP mdp = table_bandit();
    Policy pb = mixed_policy(2, 0.5);
    Dataset data = sample_bandit_data(mdp, pb, 2000, 12);
    AnnotationSpec spec;
    spec.source = AnnotationSource::reward_mean;
    spec.noise_std = 0.2;
    spec.availability_fraction = 0.5;
    AnnotatedDataset ann = annotate(data, mdp, nullptr, nullptr, spec);
    AnnotatedDataset imp = impute_missing(ann);

    // pooled means per (state, action)
    double sums[2][2] = {};
    int64_t cnts[2][2] = {};
    for (const auto& traj : ann) {
        int s = traj.base.steps[0].state;
        for (int a = 0; a < 2; ++a)
            if (traj.annotations[0].available[a]) {
                sums[s][a] += traj.annotations[0].value[a];
                cnts[s][a] += 1;
            }
    }
    for (size_t i = 0; i < imp.size(); ++i) {
        int s = imp[i].base.steps[0].state;
        int factual = imp[i].base.steps[0].action;
        for (int a = 0; a < 2; ++a) {
            if (a == factual) {
                CHECK(imp[i].annotations[0].available[a] == 0);
            } else if (ann[i].annotations[0].available[a]) {
                CHECK(imp[i].annotations[0].value[a] == ann[i].annotations[0].value[a]);
            } else {
                REQUIRE(cnts[s][a] > 0);
                CHECK(imp[i].annotations[0].available[a] == 1);
                CHECK(imp[i].annotations[0].value[a] ==
                      doctest::Approx(sums[s][a] / cnts[s][a]).epsilon(1e-12));
            }
        }
    }

    // with nothing observed anywhere, imputation is a no-op
    AnnotationSpec dry = spec;
    dry.availability_fraction = 0.0;
    AnnotatedDataset bare = impute_missing(annotate(data, mdp, nullptr, nullptr, dry));
    for (const auto& traj : bare)
        for (uint8_t av : traj.annotations[0].available) CHECK(av == 0);
}
