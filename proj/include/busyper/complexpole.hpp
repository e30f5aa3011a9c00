#pragma once

// Third evaluation route: roots of the cut polynomial in the complex plane,
// partial-fraction coefficients of the lattice generating function, and the
// busy-period density as Bessel/Marcum-Q sums.  Practical for N up to ~15.

#include <complex>
#include <string>
#include <vector>

#include "busyper/algebraic.hpp"
#include "busyper/model.hpp"

namespace busyper {

using cd = std::complex<double>;

// all 2N-3 roots of the monic cut polynomial (variable sigma), by Aberth
// iteration with Newton polish; enforces the residual bound
// |C(root)| <= 1e-8 * sum_i |c_i| |root|^i and exact conjugate pairing
std::vector<cd> solve_cut_roots(const CutPolynomial& c);

struct BetaSystem {
    std::vector<cd> sigma_roots;  // roots sigma^{(l)}
    std::vector<cd> alpha;        // (mu_1 - 1 - sigma^{(l)})/(2 sqrt r)
    std::vector<cd> beta;         // -alpha +- sqrt(alpha^2-1), |beta| < 1
    std::vector<cd> gamma;        // beta^{2N-5}(1-beta^2)/prod_{l!=k}(beta_k-beta_l)(beta_k-1/beta_l)
    cd c0{};                      // -sum gamma_k
    int n_servers = 0;
    double r = 0.0;
};

// requires N >= 3; throws NumericError on |beta| within 1e-12 of 1
BetaSystem beta_system(const ModelParams& p);

// lattice generating function z^{2(N-3)}(1-z^2)^2 / prod(z^2+2 alpha_l z+1);
// its Taylor coefficient of z^n is -sum_k beta_k^n gamma_k (test identity)
cd generating_function(const BetaSystem& bs, cd z);

// cut part of the density for N >= 3, evaluated through the Marcum-Q
// compact form with all exponentials folded into e^{-x_minus t} and scaled
// Bessel functions (overflow-safe for every t)
double pdf_marcum(const ModelParams& p, const BetaSystem& bs, double t);

// same quantity from the truncated double Neumann series with unscaled
// stdlib Bessel I_n; independent cross-check, throws once 2 sqrt(r) t > 600
double pdf_bessel_series(const ModelParams& p, const BetaSystem& bs, double t);

// cut density through explicit marcum_qbar calls with complex arguments
// a_k = sqrt(2 sqrt(r) t / beta_k), b_k = sqrt(2 sqrt(r) t beta_k);
// throws when the unfolded exponents would overflow
double pdf_marcum_direct(const ModelParams& p, const BetaSystem& bs, double t);

double pdf_n1(const ModelParams& p, double t);  // e^{-(1+r)t} I_1(2 sqrt(r) t)/(sqrt(r) t)
double pdf_n2(const ModelParams& p, double t);  // cut part, closed Bessel/Marcum form

// full density and survival: cut part plus the real poles of D- in
// (-x_minus, 0) with their residues; SF of the cut part by Gauss-Laguerre
struct ComplexPoleDistribution {
    ModelParams params;
    BetaSystem bs;       // populated for N >= 3
    PoleSet poles;       // mixture convention: residue of phi_1 = weight * |zeta|
    double pdf(double t) const;
    double sf(double t) const;
};

ComplexPoleDistribution complexpole_distribution(const ModelParams& p);

// sigma/alpha/beta/gamma/c0 tables with schema_version
std::string beta_system_json(const BetaSystem& bs);

}  // namespace busyper
