#pragma once

// Spectral engine for the partial busy period of the M/M/c queue: build the
// birth-death generator, eigendecompose it, locate the discrete poles of the
// MGF, quadrature the branch cut, and assemble the distribution as an
// exponential mixture.  Includes the small-r, near-unity and r=1 boundary
// handling.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "busyper/ddreal.hpp"
#include "busyper/model.hpp"

namespace busyper {

struct SpectralData {
    std::vector<double> xi;        // eigenvalues, ascending, all < 0
    std::vector<double> v11, v12, v22;  // first/last eigenvector products
    double ln_lambda = 0.0;        // ln of Lambda = prod_{k=2}^{N-1} (r/mu_k)
};

// psi_{+-}(s) = [r+1+s +- sqrt((r+1+s)^2 - 4r)]/(2r); throws if s lies
// strictly inside the cut ((r+1+s)^2 < 4r) since the real branches coalesce
std::pair<double, double> psi_pm(double s, double r);

// generator of the occupancy chain between states 1..N-1, symmetrized:
// diag_k = -(r + mu_k), offdiag_k = sqrt(r mu_{k+1}); dimension N-1
void build_generator(const ModelParams& p, std::vector<double>& diag,
                     std::vector<double>& offdiag);

struct NearUnityGuard {
    bool active = false;   // |1/r - G22(0)| < 1e-9
    double zeta1 = 0.0;    // linearized near-zero pole location
};

class SpectralEngine {
public:
    explicit SpectralEngine(const ModelParams& p);  // requires N >= 2

    const SpectralData& data() const { return sd_; }
    const ModelParams& params() const { return p_; }
    double cut_edge() const { return xm_; }  // x_minus = (1 - sqrt r)^2

    double psi_plus(double s) const;

    // resolvents G_ab(s) = sum v_ab / (s - xi); raw spectral sums
    double g11(double s) const;
    double g12(double s) const;
    double g22(double s) const;

    // G12/G22 at s = 0 from the cancellation-free LU corner identities
    double g12_zero() const { return std::exp(ln_g12_0_); }
    double g22_zero() const { return g22_0_; }

    // MGF phi_1(s) for s right of the rightmost singularity
    double mgf(double s) const;

    int count_poles() const;      // a-priori pole count
    PoleSet find_poles() const;   // zeros of psi_plus - G22 in (-x_minus, 0)

    double rcut(double s) const;  // cut function, deflated evaluation

    // mid-point rule nodes (x_n, w_n); adaptive triples L until the weight
    // sum and mean are stable
    std::vector<std::pair<double, double>> cut_nodes(int L) const;
    std::vector<std::pair<double, double>> cut_adaptive(int L0 = 400,
                                                        double tol = 1e-11,
                                                        int* L_used = nullptr) const;

    // completeness sums (sum v11, sum v12, sum v22) of the raw eigenbasis,
    // recorded before the top projector entries are refined
    void completeness_sums(double& s11, double& s12, double& s22) const {
        s11 = raw_s11_;
        s12 = raw_s12_;
        s22 = raw_s22_;
    }

    NearUnityGuard near_unity_pole_guard() const;

    bool small_r_criterion() const;  // max |v12| < 1e-4

private:
    friend ExponentialMixture small_r_mixture(const SpectralEngine&);

    ModelParams p_;
    int n_ = 0;  // matrix dimension N-1
    double r_ = 0.0, mu1_ = 0.0, xm_ = 0.0;
    SpectralData sd_;
    double g22_0_ = 0.0, ln_g12_0_ = 0.0, f0_ = 0.0;
    double raw_s11_ = 0.0, raw_s12_ = 0.0, raw_s22_ = 0.0;
    std::vector<double> diag_, offd_;     // (sI - T) at s = 0: r + mu_k, sqrt(r mu_{k+1})
    std::vector<long double> x0_;         // (0 - T)^{-1} e_n

    std::vector<long double> solve(double s, int b_idx) const;  // Thomas on (sI - T)
    double un(double s) const;            // last LU pivot of (sI - T)
    int count_gt(double s) const;         // Sturm count of eigenvalues > s
    struct UnDD {
        DD u;
        double up = 0.0, lnu_lead = 0.0;
        bool valid = false;
    };
    UnDD un_dd(DD s) const;
    void refine_top();

    double f_stable(double s) const;      // psi_plus - G22, stable near 0
    double f_defl(int k, double d) const; // deflated at asymptote k
    double qreg(int k) const;
    PoleSet pole_weights(const std::vector<double>& poles,
                         const std::vector<int>& assoc) const;
};

// boundary mixture for max |v12| < 1e-4: nodes -1/xi_k, weights mu1 v11/|xi_k|
ExponentialMixture small_r_mixture(const SpectralEngine& e);

// full assembly with boundary dispatch (r=0 pure death, N=1 and r=1 cut-only,
// small-r mixture, else poles + adaptive cut)
BusyPeriodDistribution bp_distribution(const ModelParams& p, int L0 = 400);

// r = 1 survival function, cut-only, L tripled until self-converged at t
double r1_sf(const ModelParams& p, double t);

// large-t cut contribution ~ mu1/(8 sqrt(pi) a r^{1/4}) R(-4a sqrt r) t^{-3/2} e^{-4a sqrt r t}
double cut_tail_asymptote(const ModelParams& p, double t);

// named diagnostic battery (completeness, trace, pole count, weight sum,
// mean) as JSON; every check carries a boolean and a residual
std::string diagnostics_json(const ModelParams& p);

}  // namespace busyper
