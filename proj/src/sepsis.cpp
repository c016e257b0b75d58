#include "semiope/sepsis.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace semiope {

namespace {

void check_prob(double p, const char* name) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument(std::string(name) + " must be in [0,1]");
}

// distribution over a level delta in {-1, 0, +1}; moves past the range stay put
struct Drift {
    double down = 0.0, up = 0.0;

    void apply(int level, int max_level, std::array<double, 3>& out) const {
        double d = down, u = up;
        if (level == 0) d = 0.0;
        if (level == max_level) u = 0.0;
        out = {d, 1.0 - d - u, u};
    }
};

}  // namespace

void SepsisConfig::validate() const {
    if (hr_levels != 3 || bp_levels != 3 || o2_levels != 2 || glu_levels != 5)
        throw std::invalid_argument("unsupported vital level counts");
    if (max_length <= 0) throw std::invalid_argument("max_length must be positive");
    check_prob(diabetes_prevalence, "diabetes_prevalence");
    check_prob(hr_fluctuate, "hr_fluctuate");
    check_prob(bp_fluctuate, "bp_fluctuate");
    check_prob(o2_fluctuate, "o2_fluctuate");
    check_prob(glu_fluctuate, "glu_fluctuate");
    check_prob(glu_fluctuate_diabetic, "glu_fluctuate_diabetic");
    check_prob(vaso_raise_bp, "vaso_raise_bp");
    check_prob(vaso_raise_bp_diabetic, "vaso_raise_bp_diabetic");
    check_prob(vaso_raise_glu_diabetic, "vaso_raise_glu_diabetic");
    check_prob(vaso_withdraw_drop_bp, "vaso_withdraw_drop_bp");
    check_prob(init_hr_abnormal, "init_hr_abnormal");
    check_prob(init_bp_abnormal, "init_bp_abnormal");
    check_prob(init_o2_abnormal, "init_o2_abnormal");
    check_prob(init_glu_abnormal, "init_glu_abnormal");
    if (vaso_raise_glu_diabetic + glu_fluctuate_diabetic / 2.0 > 1.0)
        throw std::invalid_argument("glucose shift probabilities exceed 1");
    if (sepsis_state_count(*this) != 1440)
        throw std::invalid_argument("encoded state count must be 1440");
}

int sepsis_state_count(const SepsisConfig& cfg) {
    return cfg.hr_levels * cfg.bp_levels * cfg.o2_levels * cfg.glu_levels * 2 * 2 * 2 * 2;
}

// digit order (most significant first): hr, bp, o2, glucose, diabetes, abx, vaso, vent
int sepsis_encode(const SepsisConfig& cfg, const SepsisState& st) {
    int idx = st.hr;
    idx = idx * cfg.bp_levels + st.bp;
    idx = idx * cfg.o2_levels + st.o2;
    idx = idx * cfg.glu_levels + st.glu;
    idx = idx * 2 + st.diabetes;
    idx = idx * 2 + st.abx;
    idx = idx * 2 + st.vaso;
    idx = idx * 2 + st.vent;
    return idx;
}

SepsisState sepsis_decode(const SepsisConfig& cfg, int index) {
    SepsisState st;
    st.vent = index % 2; index /= 2;
    st.vaso = index % 2; index /= 2;
    st.abx = index % 2; index /= 2;
    st.diabetes = index % 2; index /= 2;
    st.glu = index % cfg.glu_levels; index /= cfg.glu_levels;
    st.o2 = index % cfg.o2_levels; index /= cfg.o2_levels;
    st.bp = index % cfg.bp_levels; index /= cfg.bp_levels;
    st.hr = index;
    return st;
}

int sepsis_abnormal_count(const SepsisConfig&, const SepsisState& st) {
    int n = 0;
    if (st.hr != 1) ++n;
    if (st.bp != 1) ++n;
    if (st.o2 != 1) ++n;
    if (st.glu != 2) ++n;
    return n;
}

bool sepsis_is_dead(const SepsisConfig& cfg, const SepsisState& st) {
    return sepsis_abnormal_count(cfg, st) >= 3;
}

bool sepsis_is_discharged(const SepsisConfig& cfg, const SepsisState& st) {
    return sepsis_abnormal_count(cfg, st) == 0 && st.abx == 0 && st.vaso == 0 && st.vent == 0;
}

TabularMDP make_sepsis_mdp(const SepsisConfig& cfg) {
    cfg.validate();
    const int S = sepsis_state_count(cfg);
    const int A = 2;  // vasopressor off / on

    TabularMDP mdp;
    mdp.num_states = S;
    mdp.num_actions = A;
    mdp.horizon = cfg.max_length;
    mdp.discount = 1.0;
    mdp.allocate();

    for (int s = 0; s < S; ++s) {
        SepsisState st = sepsis_decode(cfg, s);
        bool dead = sepsis_is_dead(cfg, st);
        bool discharged = sepsis_is_discharged(cfg, st);
        if (dead || discharged) {
            mdp.terminal[s] = 1;
            mdp.entry_reward[s] = dead ? cfg.death_reward : cfg.discharge_reward;
            for (int a = 0; a < A; ++a) mdp.p_at(s, a, s) = 1.0;
            continue;
        }
        for (int a = 0; a < A; ++a) {
            Drift hr_d{cfg.hr_fluctuate / 2.0, cfg.hr_fluctuate / 2.0};
            Drift o2_d{cfg.o2_fluctuate / 2.0, cfg.o2_fluctuate / 2.0};

            Drift bp_d;
            if (a == 1) {
                bp_d.up = st.diabetes ? cfg.vaso_raise_bp_diabetic : cfg.vaso_raise_bp;
            } else if (st.vaso == 1) {
                bp_d.down = cfg.vaso_withdraw_drop_bp;
            } else {
                bp_d.down = cfg.bp_fluctuate / 2.0;
                bp_d.up = cfg.bp_fluctuate / 2.0;
            }

            double glu_f = st.diabetes ? cfg.glu_fluctuate_diabetic : cfg.glu_fluctuate;
            Drift glu_d{glu_f / 2.0, glu_f / 2.0};
            if (a == 1 && st.diabetes) glu_d.up = cfg.vaso_raise_glu_diabetic;

            std::array<double, 3> hr_p, bp_p, o2_p, glu_p;
            hr_d.apply(st.hr, cfg.hr_levels - 1, hr_p);
            bp_d.apply(st.bp, cfg.bp_levels - 1, bp_p);
            o2_d.apply(st.o2, cfg.o2_levels - 1, o2_p);
            glu_d.apply(st.glu, cfg.glu_levels - 1, glu_p);

            for (int dh = -1; dh <= 1; ++dh)
                for (int db = -1; db <= 1; ++db)
                    for (int dox = -1; dox <= 1; ++dox)
                        for (int dg = -1; dg <= 1; ++dg) {
                            double pr = hr_p[dh + 1] * bp_p[db + 1] * o2_p[dox + 1] * glu_p[dg + 1];
                            if (pr == 0.0) continue;
                            SepsisState nx = st;
                            nx.hr += dh;
                            nx.bp += db;
                            nx.o2 += dox;
                            nx.glu += dg;
                            nx.vaso = a;
                            mdp.p_at(s, a, sepsis_encode(cfg, nx)) += pr;
                        }
        }
    }

    // initial distribution: treatments off, vitals drawn independently,
    // terminal (dead/discharged) combinations excluded
    auto lvl_dist = [](int levels, int normal, double p_abn) {
        std::vector<double> d(levels, 0.0);
        int n_abn = levels - 1;
        for (int l = 0; l < levels; ++l)
            d[l] = (l == normal) ? 1.0 - p_abn : p_abn / n_abn;
        return d;
    };
    std::vector<double> hr_i = lvl_dist(cfg.hr_levels, 1, cfg.init_hr_abnormal);
    std::vector<double> bp_i = lvl_dist(cfg.bp_levels, 1, cfg.init_bp_abnormal);
    std::vector<double> o2_i = lvl_dist(cfg.o2_levels, 1, cfg.init_o2_abnormal);
    std::vector<double> glu_i = lvl_dist(cfg.glu_levels, 2, cfg.init_glu_abnormal);

    double total = 0.0;
    for (int hr = 0; hr < cfg.hr_levels; ++hr)
        for (int bp = 0; bp < cfg.bp_levels; ++bp)
            for (int o2 = 0; o2 < cfg.o2_levels; ++o2)
                for (int glu = 0; glu < cfg.glu_levels; ++glu)
                    for (int diab = 0; diab < 2; ++diab) {
                        SepsisState st;
                        st.hr = hr; st.bp = bp; st.o2 = o2; st.glu = glu;
                        st.diabetes = diab;
                        int s = sepsis_encode(cfg, st);
                        if (mdp.terminal[s]) continue;
                        double pr = hr_i[hr] * bp_i[bp] * o2_i[o2] * glu_i[glu] *
                                    (diab ? cfg.diabetes_prevalence : 1.0 - cfg.diabetes_prevalence);
                        mdp.initial_dist[s] = pr;
                        total += pr;
                    }
    for (double& p : mdp.initial_dist) p /= total;

    mdp.finalize_entry_rewards();
    mdp.validate();
    return mdp;
}

}  // namespace semiope
