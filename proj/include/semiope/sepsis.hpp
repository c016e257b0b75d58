#pragma once

#include "semiope/mdp.hpp"

namespace semiope {

// Tabular sepsis-style simulator.  Patient state: four ordinal vitals (heart
// rate 3, blood pressure 3, oxygen 2, glucose 5 levels), a diabetes flag, and
// three treatment bits (antibiotics, vasopressor, ventilation).  Only the
// vasopressor is controllable; antibiotics and ventilation are kept in the
// encoding but frozen off.  Encoded flat state count is
// 3*3*2*5*2*2*2*2 = 1440; dead/discharged states are absorbing and carry an
// entry reward realized on the transition into them.
struct SepsisConfig {
    int hr_levels = 3;
    int bp_levels = 3;
    int o2_levels = 2;
    int glu_levels = 5;

    double diabetes_prevalence = 0.3;
    int max_length = 20;

    // spontaneous fluctuation: each vital moves one level up/down with
    // probability fluctuate/2 each (moves past the boundary stay put)
    double hr_fluctuate = 0.03;
    double bp_fluctuate = 0.08;
    double o2_fluctuate = 0.03;
    double glu_fluctuate = 0.03;
    double glu_fluctuate_diabetic = 0.1;

    // vasopressor effects
    double vaso_raise_bp = 0.7;
    double vaso_raise_bp_diabetic = 0.5;
    double vaso_raise_glu_diabetic = 0.5;
    double vaso_withdraw_drop_bp = 0.3;

    // initial per-vital abnormality probabilities (split evenly between
    // abnormal levels); states violating the start conditions are excluded and
    // the distribution renormalized
    double init_hr_abnormal = 0.1;
    double init_bp_abnormal = 0.5;
    double init_o2_abnormal = 0.08;
    double init_glu_abnormal = 0.1;

    double discharge_reward = 1.0;
    double death_reward = -1.0;

    void validate() const;
};

struct SepsisState {
    int hr = 1, bp = 1, o2 = 1, glu = 2;
    int diabetes = 0, abx = 0, vaso = 0, vent = 0;
};

int sepsis_state_count(const SepsisConfig& cfg);  // 1440 for the default levels
int sepsis_encode(const SepsisConfig& cfg, const SepsisState& st);
SepsisState sepsis_decode(const SepsisConfig& cfg, int index);

int sepsis_abnormal_count(const SepsisConfig& cfg, const SepsisState& st);
bool sepsis_is_dead(const SepsisConfig& cfg, const SepsisState& st);
bool sepsis_is_discharged(const SepsisConfig& cfg, const SepsisState& st);

TabularMDP make_sepsis_mdp(const SepsisConfig& cfg);

}  // namespace semiope
