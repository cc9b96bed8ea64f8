// markov.hpp - memoryless limit: edge gain/drain on the chain at rate eps^2 / gamma
#pragma once

#include "ringtransport/full_dynamics.hpp"

namespace ringtransport {

double effective_rate(double epsilon, double gamma);

// The reduction assumes gamma >> epsilon; flagged false when gamma < 5 epsilon.
bool markov_regime(double epsilon, double gamma);

// Chain with edge reservoirs: everything the Markovian equation depends on.
struct MarkovChain {
    int L = 5;
    double Js = 1.0;
    double gamma_tilde = 0.16;
    double n1 = 0.5;  // mean filling seen by site 1
    double nL = 0.5;  // mean filling seen by site L
};

// gamma_tilde = eps^2 / gamma, fillings = band averages of each contact.
MarkovChain markov_chain(const ModelParams& params);

// -i[H_s, rho] - gamma_tilde sum_l ( {P_l, rho} / 2 - n_l P_l )
CMatrix markov_rhs(const CMatrix& rho, const MarkovChain& chain);

StationaryResult stationary_markov(const MarkovChain& chain);
StationaryResult stationary_markov(const ModelParams& params);

// Js^2 gt / (Js^2 + gt^2) * (n1 - nL) / 2
double closed_form_current(const MarkovChain& chain);
double closed_form_current(const ModelParams& params);

} // namespace ringtransport
