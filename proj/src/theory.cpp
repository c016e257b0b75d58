#include "semiope/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace semiope {

double TheoryReport::std_dev() const { return std::sqrt(variance); }

double TheoryReport::rmse() const { return std::sqrt(bias * bias + variance); }

namespace {

void require_bandit(const TabularMDP& mdp, const char* name) {
    if (!mdp.is_bandit())
        throw std::invalid_argument(std::string(name) + " applies to single-step problems only");
}

double eps_of(const AnnotationErrorModel& err, const TabularMDP& mdp, int s, int a) {
    if (err.eps_g.empty()) return 0.0;
    return err.eps_g[size_t(s) * mdp.num_actions + a];
}

double sigma_g_of(const AnnotationErrorModel& err, const TabularMDP& mdp, int s, int a) {
    if (err.sigma_g.empty()) return mdp.rstd(s, a);
    return err.sigma_g[size_t(s) * mdp.num_actions + a];
}

}  // namespace

TheoryReport theory_is(const TabularMDP& mdp, const Policy& pi_e, const Policy& pi_b) {
    require_bandit(mdp, "theory_is");
    const int S = mdp.num_states, A = mdp.num_actions;

    TheoryReport rep;
    double bias = 0.0, m_mean = 0.0, m_sq = 0.0, t2 = 0.0, t3 = 0.0;
    for (int s = 0; s < S; ++s) {
        double d1 = mdp.initial_dist[s];
        if (d1 == 0.0) continue;
        double m = 0.0, sq = 0.0;
        for (int a = 0; a < A; ++a) {
            double pe = pi_e(s, a), pb = pi_b(s, a);
            if (pb == 0.0) {
                bias -= d1 * pe * mdp.rmean(s, a);
                continue;
            }
            double rho = pe / pb;
            double x = rho * mdp.rmean(s, a);
            m += pb * x;
            sq += pb * x * x;
            t3 += d1 * pb * rho * rho * mdp.rstd(s, a) * mdp.rstd(s, a);
        }
        m_mean += d1 * m;
        m_sq += d1 * m * m;
        t2 += d1 * (sq - m * m);
    }
    double t1 = m_sq - m_mean * m_mean;

    rep.bias = bias;
    rep.bias_terms = {{"support_deficiency", bias}};
    rep.variance = t1 + t2 + t3;
    rep.variance_terms = {{"state_dispersion", t1},
                          {"action_dispersion", t2},
                          {"reward_noise", t3}};
    return rep;
}

TheoryReport theory_cstar_is(const TabularMDP& mdp, const Policy& pi_e, const Policy& pi_b,
                             const AnnotationErrorModel& err) {
    require_bandit(mdp, "theory_cstar_is");
    const int S = mdp.num_states, A = mdp.num_actions;

    TheoryReport rep;
    double bias = 0.0;
    double mu_mean = 0.0, mu_sq = 0.0, t2 = 0.0, t3 = 0.0;
    for (int s = 0; s < S; ++s) {
        double d1 = mdp.initial_dist[s];
        if (d1 == 0.0) continue;
        for (int a = 0; a < A; ++a) {
            double pb = pi_b(s, a);
            if (pb == 0.0) continue;
            // conditional mean/variance of the estimate given factual action a
            double mu = 0.0;
            for (int at = 0; at < A; ++at) {
                double pe = pi_e(s, at);
                if (pe == 0.0) continue;
                double sr = mdp.rstd(s, at);
                if (at == a) {
                    mu += pe * mdp.rmean(s, at);
                    t2 += d1 * pb * pe * pe * sr * sr;
                } else {
                    double sg = sigma_g_of(err, mdp, s, at);
                    mu += pe * (mdp.rmean(s, at) + eps_of(err, mdp, s, at));
                    bias += d1 * pb * pe * eps_of(err, mdp, s, at);
                    t2 += d1 * pb * pe * pe * sr * sr;
                    t3 += d1 * pb * pe * pe * (sg * sg - sr * sr);
                }
            }
            mu_mean += d1 * pb * mu;
            mu_sq += d1 * pb * mu * mu;
        }
    }
    double t1 = mu_sq - mu_mean * mu_mean;

    rep.bias = bias;
    rep.bias_terms = {{"annotation_error", bias}};
    rep.variance = t1 + t2 + t3;
    rep.variance_terms = {{"value_dispersion", t1},
                          {"reward_noise", t2},
                          {"annotation_excess_noise", t3}};
    return rep;
}

TheoryReport theory_cis(const TabularMDP& mdp, const Policy& pi_e, const Policy& pi_b,
                        const AvgWeightTable& wtab, const AnnotationErrorModel& err) {
    require_bandit(mdp, "theory_cis");
    const int S = mdp.num_states, A = mdp.num_actions;
    if (wtab.num_states != S || wtab.num_actions != A)
        throw std::invalid_argument("weight table dimensions do not match the problem");

    Policy pbp = augmented_policy(wtab, pi_b);

    TheoryReport rep;
    double b1 = 0.0, b2 = 0.0;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, t5 = 0.0, t6 = 0.0, t7 = 0.0, t8 = 0.0;
    double v_mean = 0.0, v_sq = 0.0;

    std::vector<double> rho(A);
    for (int s = 0; s < S; ++s) {
        double d1 = mdp.initial_dist[s];
        if (d1 == 0.0) continue;

        double vpe = 0.0;
        for (int a = 0; a < A; ++a) {
            double pe = pi_e(s, a);
            vpe += pe * mdp.rmean(s, a);
            double pp = pbp(s, a);
            rho[a] = (pp > 0.0) ? pe / pp : 0.0;
            if (pe > 0.0 && pp == 0.0) b1 -= d1 * pe * mdp.rmean(s, a);
            if (pp > 0.0) {
                if (pi_b(s, a) > 0.0) {
                    double delta_w = 1.0 - wtab.wbar(s, a, a) * pi_b(s, a) / pp;
                    b2 += d1 * delta_w * pe * eps_of(err, mdp, s, a);
                } else {
                    b2 += d1 * pe * eps_of(err, mdp, s, a);
                }
            }
        }
        v_mean += d1 * vpe;
        v_sq += d1 * vpe * vpe;

        double x_mean = 0.0, x_sq = 0.0;
        for (int a = 0; a < A; ++a) {
            double pb = pi_b(s, a);
            if (pb == 0.0) continue;
            double x = 0.0;
            for (int at = 0; at < A; ++at) {
                if (rho[at] == 0.0) continue;
                double wbar = wtab.wbar(s, a, at);
                double wvar = wtab.wvar(s, a, at);
                double rbar = mdp.rmean(s, at);
                double sr = mdp.rstd(s, at);
                double sg = sigma_g_of(err, mdp, s, at);
                double dsig = sg * sg - sr * sr;
                double r2 = rho[at] * rho[at];
                x += rho[at] * wbar * rbar;
                t3 += d1 * pb * r2 * wbar * wbar * sr * sr;
                t5 += d1 * pb * r2 * rbar * rbar * wvar;
                t6 += d1 * pb * r2 * sr * sr * wvar;
                if (at != a) {
                    t4 += d1 * pb * r2 * wbar * wbar * dsig;
                    t8 += d1 * pb * r2 * dsig * wvar;
                }
                for (int aj = at + 1; aj < A; ++aj) {
                    if (rho[aj] == 0.0) continue;
                    t7 += d1 * pb * 2.0 * rho[at] * rho[aj] * rbar * mdp.rmean(s, aj) *
                          wtab.wcov(s, a, at, aj);
                }
            }
            x_mean += pb * x;
            x_sq += pb * x * x;
        }
        t2 += d1 * (x_sq - x_mean * x_mean);
    }
    t1 = v_sq - v_mean * v_mean;

    rep.bias = b1 + b2;
    rep.bias_terms = {{"support_deficiency", b1}, {"annotation_error", b2}};
    rep.variance = t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8;
    rep.variance_terms = {{"state_dispersion", t1},
                          {"action_dispersion", t2},
                          {"reward_noise", t3},
                          {"annotation_excess_noise", t4},
                          {"weight_noise_mean_reward", t5},
                          {"weight_noise_reward_noise", t6},
                          {"weight_covariance", t7},
                          {"weight_noise_excess_noise", t8}};
    return rep;
}

}  // namespace semiope
