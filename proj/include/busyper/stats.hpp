#pragma once

// Summary statistics of busy-period laws: exact mean, mixture mean/log-mean/
// differential entropy, hazard rate, regeneration-cycle survival function.

#include "busyper/model.hpp"

namespace busyper {

// (1/r)[(Nr)^N/(N!(1-r)) + sum_{k=1}^{N-1}(Nr)^k/k!], evaluated in log space;
// r = 0 limit is N, r >= 1 diverges
double exact_mean(const ModelParams& p);

double mixture_mean(const ExponentialMixture& m);

// sum w_l ln u_l - gamma_e  (log of BP = log U + log V, V unit exponential)
double mixture_logmean(const ExponentialMixture& m);

// differential entropy -int P ln P on geometric Simpson panels with L_quad
// subintervals each; the log-density in log-sum-exp form.  Errors if
// doubling the quadrature size moves the value by more than 1e-6.
double mixture_entropy(const ExponentialMixture& m, int L_quad = 64);

// P(t)/F(t); throws when the SF has underflowed
double hazard(const BusyPeriodDistribution& d, double t);

// SF of idle (rate r) + busy period: sum w_l (r e^{-x_l t} - x_l e^{-r t})/(r - x_l)
double regeneration_sf(const BusyPeriodDistribution& d, double t);

}  // namespace busyper
