#pragma once

#include <string>
#include <vector>

#include "semiope/annotation.hpp"
#include "semiope/mdp.hpp"

namespace semiope {

struct TheoryTerm {
    std::string name;
    double value = 0.0;
};

// closed-form single-sample bias/variance of a bandit estimator; the labeled
// terms sum to the totals
struct TheoryReport {
    double bias = 0.0;
    double variance = 0.0;
    std::vector<TheoryTerm> bias_terms;
    std::vector<TheoryTerm> variance_terms;

    double std_dev() const;
    double rmse() const;  // sqrt(bias^2 + variance), single sample
};

// per-(state, action) annotation error model: annotations for action a in
// state s have mean R-bar(s,a) + eps_g and standard deviation sigma_g,
// independent of the factual action.  Empty spans mean zero / sigma_R.
struct AnnotationErrorModel {
    std::vector<double> eps_g;    // [s][a]
    std::vector<double> sigma_g;  // [s][a]
};

TheoryReport theory_is(const TabularMDP& mdp, const Policy& pi_e, const Policy& pi_b);

// general combined form: average weights W-bar with covariances (for example
// from scheme_weight_moments), annotation error model, augmented behavior
// policy derived internally
TheoryReport theory_cis(const TabularMDP& mdp, const Policy& pi_e, const Policy& pi_b,
                        const AvgWeightTable& wtab, const AnnotationErrorModel& err);

TheoryReport theory_cstar_is(const TabularMDP& mdp, const Policy& pi_e, const Policy& pi_b,
                             const AnnotationErrorModel& err);

}  // namespace semiope
