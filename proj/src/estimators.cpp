#include "semiope/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiope {

namespace {

double ratio(const Policy& pi_e, const Policy& pi_b, int s, int a, int t) {
    double pe = pi_e(s, a);
    if (pe == 0.0) return 0.0;
    double pb = pi_b(s, a);
    if (pb <= 0.0)
        throw SupportViolation("evaluation policy action outside behavior support", s, a, t);
    return pe / pb;
}

EstimateReport finalize(std::string id, std::vector<double> est, std::vector<double> w) {
    EstimateReport rep;
    rep.estimator_id = std::move(id);
    rep.n = int(est.size());
    rep.value = est.empty() ? 0.0 : mean_of(est);
    rep.ess = effective_sample_size(w);
    rep.per_trajectory_estimates = std::move(est);
    rep.per_trajectory_weights = std::move(w);
    return rep;
}

void require_bandit(const AnnotatedTrajectory& traj, const char* name) {
    if (traj.base.steps.size() != 1)
        throw std::invalid_argument(std::string(name) + " requires single-step trajectories");
}

}  // namespace

double effective_sample_size(std::span<const double> weights) {
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    if (s2 == 0.0) return 0.0;
    return s * s / s2;
}

EstimateReport is_estimate(const Dataset& data, const Policy& pi_e, const Policy& pi_b,
                           double discount) {
    std::vector<double> est, wts;
    est.reserve(data.size());
    wts.reserve(data.size());
    for (const Trajectory& traj : data) {
        double rho = 1.0, ret = 0.0, g = 1.0;
        for (size_t t = 0; t < traj.steps.size(); ++t) {
            const Step& st = traj.steps[t];
            rho *= ratio(pi_e, pi_b, st.state, st.action, int(t));
            ret += g * st.reward;
            g *= discount;
        }
        est.push_back(rho * ret);
        wts.push_back(rho);
    }
    return finalize("is", std::move(est), std::move(wts));
}

EstimateReport pdis(const Dataset& data, const Policy& pi_e, const Policy& pi_b,
                    double discount) {
    std::vector<double> est, wts;
    est.reserve(data.size());
    wts.reserve(data.size());
    for (const Trajectory& traj : data) {
        double v = 0.0, rho = 1.0;
        for (int t = int(traj.steps.size()) - 1; t >= 0; --t) {
            const Step& st = traj.steps[t];
            double r = ratio(pi_e, pi_b, st.state, st.action, t);
            v = r * (st.reward + discount * v);
            rho *= r;
        }
        est.push_back(v);
        wts.push_back(rho);
    }
    return finalize("pdis", std::move(est), std::move(wts));
}

EstimateReport pdwis(const Dataset& data, const Policy& pi_e, const Policy& pi_b,
                     double discount) {
    const size_t n = data.size();
    size_t tmax = 0;
    for (const Trajectory& traj : data) tmax = std::max(tmax, traj.steps.size());

    std::vector<double> cumw(n, 1.0);
    std::vector<double> est(n, 0.0);
    double value = 0.0, g = 1.0;
    for (size_t t = 0; t < tmax; ++t) {
        for (size_t i = 0; i < n; ++i)
            if (t < data[i].steps.size()) {
                const Step& st = data[i].steps[t];
                cumw[i] *= ratio(pi_e, pi_b, st.state, st.action, int(t));
            }
        double denom = compensated_sum(cumw);
        if (denom > 0.0)
            for (size_t i = 0; i < n; ++i) {
                if (t >= data[i].steps.size()) continue;
                double contrib = g * cumw[i] * data[i].steps[t].reward / denom;
                value += contrib;
                est[i] += double(n) * contrib;
            }
        g *= discount;
    }
    EstimateReport rep = finalize("pdwis", std::move(est), std::move(cumw));
    rep.value = value;
    return rep;
}

EstimateReport wis_from_report(const EstimateReport& report) {
    EstimateReport rep = report;
    rep.estimator_id = "w" + report.estimator_id;
    double wsum = compensated_sum(report.per_trajectory_weights);
    if (wsum == 0.0) {
        rep.value = 0.0;
        return rep;
    }
    rep.value = compensated_sum(report.per_trajectory_estimates) / wsum;
    double scale = double(report.n) / wsum;
    for (double& e : rep.per_trajectory_estimates) e *= scale;
    return rep;
}

EstimateReport cis(const WeightedDataset& wd, const Policy& pi_e, const Policy& pi_b_plus) {
    std::vector<double> est, wts;
    est.reserve(wd.trajectories.size());
    wts.reserve(wd.trajectories.size());
    for (size_t i = 0; i < wd.trajectories.size(); ++i) {
        const AnnotatedTrajectory& traj = wd.trajectories[i];
        require_bandit(traj, "cis");
        const Step& st = traj.base.steps[0];
        const StepAnnotations& ann = traj.annotations[0];
        const std::vector<double>& w = wd.weights[i][0];
        double v = 0.0, rw = 0.0;
        for (size_t a = 0; a < w.size(); ++a) {
            if (w[a] == 0.0) continue;
            double r = ratio(pi_e, pi_b_plus, st.state, int(a), 0);
            double y = (int(a) == st.action) ? st.reward : ann.value[a];
            v += w[a] * r * y;
            rw += w[a] * r;
        }
        est.push_back(v);
        wts.push_back(rw);
    }
    return finalize("cis", std::move(est), std::move(wts));
}

EstimateReport cstar_is(const AnnotatedDataset& data, const Policy& pi_e) {
    std::vector<double> est;
    est.reserve(data.size());
    for (const AnnotatedTrajectory& traj : data) {
        require_bandit(traj, "cstar_is");
        const Step& st = traj.base.steps[0];
        const StepAnnotations& ann = traj.annotations[0];
        double v = pi_e(st.state, st.action) * st.reward;
        for (size_t a = 0; a < ann.available.size(); ++a) {
            if (int(a) == st.action) continue;
            double pe = pi_e(st.state, int(a));
            if (pe == 0.0) continue;
            if (!ann.available[a])
                throw std::invalid_argument(
                    "cstar_is requires annotations on every action the evaluation policy supports");
            v += pe * ann.value[a];
        }
        est.push_back(v);
    }
    std::vector<double> wts(est.size(), 1.0);
    return finalize("cstar_is", std::move(est), std::move(wts));
}

std::vector<double> rho_plus_steps(const AnnotatedTrajectory& traj,
                                   const std::vector<std::vector<double>>& step_weights,
                                   const Policy& pi_e, const Policy& pi_b_plus) {
    std::vector<double> out(traj.base.steps.size(), 0.0);
    for (size_t t = 0; t < traj.base.steps.size(); ++t) {
        const Step& st = traj.base.steps[t];
        const std::vector<double>& w = step_weights[t];
        double rw = 0.0;
        for (size_t a = 0; a < w.size(); ++a)
            if (w[a] != 0.0) rw += w[a] * ratio(pi_e, pi_b_plus, st.state, int(a), int(t));
        out[t] = rw;
    }
    return out;
}

EstimateReport cpdis(const WeightedDataset& wd, const Policy& pi_e, const Policy& pi_b_plus,
                     double discount) {
    std::vector<double> est, wts;
    est.reserve(wd.trajectories.size());
    wts.reserve(wd.trajectories.size());
    for (size_t i = 0; i < wd.trajectories.size(); ++i) {
        const AnnotatedTrajectory& traj = wd.trajectories[i];
        double v = 0.0, rho = 1.0;
        for (int t = int(traj.base.steps.size()) - 1; t >= 0; --t) {
            const Step& st = traj.base.steps[t];
            const StepAnnotations& ann = traj.annotations[t];
            const std::vector<double>& w = wd.weights[i][t];
            double vt = 0.0, rw = 0.0;
            for (size_t a = 0; a < w.size(); ++a) {
                if (w[a] == 0.0) continue;
                double r = ratio(pi_e, pi_b_plus, st.state, int(a), t);
                double y = (int(a) == st.action) ? st.reward + discount * v : ann.value[a];
                vt += w[a] * r * y;
                rw += w[a] * r;
            }
            v = vt;
            rho *= rw;
        }
        est.push_back(v);
        wts.push_back(rho);
    }
    return finalize("cpdis", std::move(est), std::move(wts));
}

EstimateReport cstar_pdis(const AnnotatedDataset& data, const Policy& pi_e, double discount) {
    std::vector<double> est, wts;
    est.reserve(data.size());
    wts.reserve(data.size());
    for (const AnnotatedTrajectory& traj : data) {
        double v = 0.0, rho = 1.0;
        for (int t = int(traj.base.steps.size()) - 1; t >= 0; --t) {
            const Step& st = traj.base.steps[t];
            const StepAnnotations& ann = traj.annotations[t];
            double vt = pi_e(st.state, st.action) * (st.reward + discount * v);
            double rw = pi_e(st.state, st.action);
            for (size_t a = 0; a < ann.available.size(); ++a) {
                if (int(a) == st.action) continue;
                double pe = pi_e(st.state, int(a));
                if (pe == 0.0) continue;
                if (!ann.available[a])
                    throw std::invalid_argument(
                        "cstar_pdis requires annotations on every action the evaluation policy "
                        "supports");
                vt += pe * ann.value[a];
                rw += pe;
            }
            v = vt;
            rho *= rw;
        }
        est.push_back(v);
        wts.push_back(rho);
    }
    return finalize("cstar_pdis", std::move(est), std::move(wts));
}

EstimateReport naive_unweighted(const AnnotatedDataset& data, const Policy& pi_e,
                                const Policy& pi_b_plus, double discount) {
    std::vector<double> est, wts;
    for (const AnnotatedTrajectory& traj : data) {
        const size_t T = traj.base.steps.size();
        // cumulative ratios and partial per-decision sums over the factual prefix
        std::vector<double> cum(T + 1, 1.0), prefix(T + 1, 0.0), gpow(T + 1, 1.0);
        for (size_t t = 0; t < T; ++t) {
            const Step& st = traj.base.steps[t];
            cum[t + 1] = cum[t] * ratio(pi_e, pi_b_plus, st.state, st.action, int(t));
            prefix[t + 1] = prefix[t] + gpow[t] * cum[t + 1] * st.reward;
            gpow[t + 1] = gpow[t] * discount;
        }
        est.push_back(prefix[T]);
        wts.push_back(cum[T]);
        for (size_t t = 0; t < T; ++t) {
            const Step& st = traj.base.steps[t];
            const StepAnnotations& ann = traj.annotations[t];
            for (size_t a = 0; a < ann.available.size(); ++a) {
                if (!ann.available[a]) continue;
                double rho = cum[t] * ratio(pi_e, pi_b_plus, st.state, int(a), int(t));
                est.push_back(prefix[t] + gpow[t] * rho * ann.value[a]);
                wts.push_back(rho);
            }
        }
    }
    return finalize("naive", std::move(est), std::move(wts));
}

EstimateReport naive_weighted(const AnnotatedDataset& data, const Policy& pi_e,
                              const Policy& pi_b, const Policy& pi_b_plus, double discount) {
    std::vector<double> est, wts;
    est.reserve(data.size());
    wts.reserve(data.size());
    for (const AnnotatedTrajectory& traj : data) {
        const size_t T = traj.base.steps.size();
        if (!traj.annotations.empty() && traj.annotations[0].available.size() != 2)
            throw std::invalid_argument("naive_weighted supports binary actions only");
        std::vector<double> cum(T + 1, 1.0), prefix(T + 1, 0.0), gpow(T + 1, 1.0);
        for (size_t t = 0; t < T; ++t) {
            const Step& st = traj.base.steps[t];
            cum[t + 1] = cum[t] * ratio(pi_e, pi_b, st.state, st.action, int(t));
            prefix[t + 1] = prefix[t] + gpow[t] * st.reward;
            gpow[t + 1] = gpow[t] * discount;
        }
        double wstep = 1.0 / double(T + 1);
        double v = 0.0, rw = 0.0, factual_coef = 1.0;
        for (size_t t = 0; t < T; ++t) {
            const Step& st = traj.base.steps[t];
            int cf = 1 - st.action;
            if (!traj.annotations[t].available[cf]) continue;
            factual_coef -= wstep;
            // counterfactual step keeps the plain behavior ratio where supported;
            // the augmented policy is only a fallback for deterministic pi_b
            const Policy& denom = pi_b(st.state, cf) > 0.0 ? pi_b : pi_b_plus;
            double rho = cum[t] * ratio(pi_e, denom, st.state, cf, int(t));
            v += wstep * rho * (prefix[t] + gpow[t] * traj.annotations[t].value[cf]);
            rw += wstep * rho;
        }
        v += factual_coef * cum[T] * prefix[T];
        rw += factual_coef * cum[T];
        est.push_back(v);
        wts.push_back(rw);
    }
    return finalize("naive_weighted", std::move(est), std::move(wts));
}

}  // namespace semiope
