#include "busyper/algebraic.hpp"

#include <cmath>
#include <stdexcept>

#include "busyper/spectral.hpp"

namespace busyper {

namespace poly {

double eval(const Poly& p, double x) {
    double acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

Poly add(const Poly& a, const Poly& b) {
    Poly out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
    return out;
}

Poly mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly scale(const Poly& a, double c) {
    Poly out = a;
    for (double& v : out) v *= c;
    return out;
}

Poly shift(const Poly& a, double c) {
    // Taylor shift by repeated synthetic division
    Poly out = a;
    const int n = int(a.size());
    for (int k = 0; k < n - 1; ++k)
        for (int i = n - 2; i >= k; --i) out[i] += c * out[i + 1];
    return out;
}

Poly derivative(const Poly& a) {
    if (a.size() <= 1) return {0.0};
    Poly out(a.size() - 1);
    for (std::size_t i = 1; i < a.size(); ++i) out[i - 1] = a[i] * double(i);
    return out;
}

}  // namespace poly

double eta_chain_mgf(const ModelParams& p, double s) {
    p.validate();
    const int N = p.n_servers;
    const auto [psi_p, psi_m] = psi_pm(s, p.r);
    (void)psi_p;
    double eta = p.r * psi_m;  // eta_N
    for (int k = N - 1; k >= 1; --k) {
        const double sigma_k = s + p.r + p.mu(k);
        const double den = sigma_k - eta;
        if (den == 0.0) throw NumericError("eta_chain_mgf: vanishing denominator");
        eta = p.r * p.mu(k) / den;
    }
    return eta / p.r;  // for N = 1 the loop is empty and this is psi_-
}

std::vector<Poly> x_recursion(const ModelParams& p) {
    p.validate();
    const int N = p.n_servers;
    std::vector<Poly> X(N);
    X[0] = {0.0};
    if (N >= 2) X[1] = {1.0};
    for (int n = 2; n <= N - 1; ++n) {
        const double muhat = p.mu(n - 1) - p.mu1();  // (n - 2)/N
        Poly lin = {muhat, 1.0};                     // sigma_1 + muhat_{n-1}
        X[n] = poly::add(poly::mul(lin, X[n - 1]),
                         poly::scale(X[n - 2], -p.r * p.mu(n - 1)));
    }
    return X;
}

DPolynomials d_polynomials(const ModelParams& p) {
    const int N = p.n_servers;
    if (N < 2) throw std::domain_error("d_polynomials requires N >= 2");
    const auto X = x_recursion(p);
    const double c = p.r + p.mu1();  // sigma_1 = s + c
    DPolynomials dp;
    dp.d0 = poly::shift(X[N - 1], c);
    dp.d1 = poly::scale(poly::shift(X[N - 2], c), -p.r * p.mu(N - 1));
    return dp;
}

Poly dplus_dminus(const ModelParams& p, const DPolynomials& dp) {
    const int N = p.n_servers;
    const double muN1 = p.mu(N - 1);
    Poly sigN1 = {p.r + muN1, 1.0};  // sigma_{N-1}(s)
    Poly a = poly::add(poly::scale(sigN1, muN1 - 1.0), Poly{p.r});
    Poly b = poly::add(sigN1, Poly{muN1 - 1.0});
    Poly inner = poly::add(poly::mul(a, dp.d0), poly::mul(b, dp.d1));
    return poly::add(poly::mul(dp.d1, dp.d1), poly::mul(dp.d0, inner));
}

namespace {

// ln of (1/(r mu1)) prod_{k=1}^{N-1} (r mu_k) = ln prod_{k=2}^{N-1} (r mu_k)
double ln_prefactor(const ModelParams& p) {
    double s = 0.0;
    for (int k = 2; k <= p.n_servers - 1; ++k) s += std::log(p.r * p.mu(k));
    return s;
}

}  // namespace

double rcut_algebraic(const ModelParams& p, double s) {
    p.validate();
    if (p.n_servers == 1) return 1.0 / p.r;
    const auto dp = d_polynomials(p);
    const Poly dd = dplus_dminus(p, dp);
    return std::exp(ln_prefactor(p)) / poly::eval(dd, s);
}

CutPolynomial cut_polynomial(const ModelParams& p) {
    const int N = p.n_servers;
    if (N < 2) throw std::domain_error("cut_polynomial requires N >= 2");
    const auto dp = d_polynomials(p);
    Poly dd = dplus_dminus(p, dp);
    // change variable s -> sigma - (r + mu_1), then normalize
    Poly c = poly::scale(poly::shift(dd, -(p.r + p.mu1())), -p.mu1());
    CutPolynomial out;
    out.n_servers = N;
    out.r = p.r;
    out.scale_const = c.back();
    out.coeffs = poly::scale(c, 1.0 / c.back());
    return out;
}

double critical_r(int N) {
    if (N < 1) throw std::domain_error("critical_r requires N >= 1");
    if (N == 1) return 0.0;
    if (N == 2) return 0.5;  // root s = r - 1/2 of the degree-1 cut polynomial
    auto g = [N](double y) {
        ModelParams p{N, y * y, 1.0};
        const auto dp = d_polynomials(p);
        const double sstar = -(1.0 - y) * (1.0 - y);
        const double sig = 2.0 * y - 1.0 + p.mu(N - 1);
        return poly::eval(dp.d0, sstar) * (sig - y) + poly::eval(dp.d1, sstar);
    };
    // largest root of g in (0,1): scan downward from 1 for the first sign change
    const int M = 4000;
    double hi = 1.0 - 1e-12, lo = 0.0;
    double ghi = g(hi);
    bool found = false;
    for (int i = 1; i <= M; ++i) {
        double y = 1.0 - double(i) / M;
        if (y <= 0.0) y = 1e-12;
        const double gy = g(y);
        if (gy == 0.0) return y * y;
        if ((gy > 0.0) != (ghi > 0.0)) {
            lo = y;
            found = true;
            break;
        }
        hi = y;
        ghi = gy;
    }
    if (!found) throw NumericError("critical_r: no sign change located");
    double glo = g(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    const double y = 0.5 * (lo + hi);
    return y * y;
}

double algebraic_pole_residue(const ModelParams& p, const DPolynomials& dp,
                              double s) {
    const int N = p.n_servers;
    const double d0 = poly::eval(dp.d0, s);
    const double d1 = poly::eval(dp.d1, s);
    if (d0 == 0.0) throw NumericError("algebraic_pole_residue: D0 vanishes");
    const Poly dd = dplus_dminus(p, dp);
    const double ddp = poly::eval(poly::derivative(dd), s);
    if (ddp == 0.0) throw NumericError("algebraic_pole_residue: multiple root");
    const double sig = s + p.r + p.mu(N - 1);
    const double num = sig + p.mu(N - 1) - 1.0 + 2.0 * d1 / d0;
    // (1/r) prod_{k=1}^{N-1}(r mu_k) = mu_1 * exp(ln_prefactor)
    return p.mu1() * std::exp(ln_prefactor(p)) * num / ddp;
}

std::pair<double, double> d_factors(const ModelParams& p, const DPolynomials& dp,
                                    double s) {
    const auto [psi_p, psi_m] = psi_pm(s, p.r);
    const double d0 = poly::eval(dp.d0, s);
    const double d1 = poly::eval(dp.d1, s);
    const double sig = s + p.r + p.mu(p.n_servers - 1);
    return {d0 * (sig - p.r * psi_m) + d1, d0 * (sig - p.r * psi_p) + d1};
}

}  // namespace busyper
