#pragma once

// Large-N limits: the M/M/infinity mixture from zeros of regularized Kummer
// functions, the r = 1 erfcx law, and the constant-r two-exponential
// approximation anchored at the dominant pole.

#include <vector>

#include "busyper/model.hpp"

namespace busyper {

struct KummerZeros {
    std::vector<double> chi;   // zeros of M(s, s+1, rho)/Gamma(s+1), chi_l in (-l, -l+1)
    std::vector<double> chi1;  // zeros of M(s, s+2, rho)/Gamma(s+2), shifted family
};

// first L zeros of each family, bisected to 1e-12 with verified brackets;
// for integer rho the shifted family has the exact zero -rho
KummerZeros kummer_zeros(double rho, int L);

// M/M/infinity busy-period law as a mixture over nodes -1/chi_k with
// interlacing-ratio weights; L grows until the chi/chi1 pairs coincide to
// 1e-10 (cap 200)
ExponentialMixture mminf_mixture(double rho);

// r = 1 scale m = (Lambda/mu_1)^2 = (N^{N-1}/(N-1)!)^2, in log space
double unity_m_scale(int N);

// SF and PDF of the r = 1 limit law: SF(t) = erfcx(sqrt(t/m))
double unity_sf(double t, double m);
double unity_pdf(double t, double m);

// ln m - gamma_e
double unity_logmean(double m);

struct TwoExpApprox {
    double nu = 0.0;     // weight of the dominant-pole exponential
    double zeta1 = 0.0;  // dominant pole
    double m_fast = 0.0; // (1 - nu) N
    double m_slow = 0.0; // mean - (1 - nu) m_fast, slow scale carrying mass nu

    double sf(double t) const;
    double pdf(double t) const;
};

// requires at least one discrete pole; nu is its mixture weight
TwoExpApprox const_r_two_exp(const ModelParams& p);

}  // namespace busyper
