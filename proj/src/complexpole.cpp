#include "busyper/complexpole.hpp"

#include <algorithm>
#include <cmath>

#include "busyper/spectral.hpp"
#include "busyper/specfun.hpp"
#include "json.hpp"

namespace busyper {

namespace {

// value and derivative of a monic-ordered dense polynomial at z
std::pair<cd, cd> horner2(const Poly& c, cd z) {
    cd p = 0.0, dp = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[i];
    }
    return {p, dp};
}

double coeff_scale(const Poly& c, cd z) {
    double s = 0.0, az = std::abs(z), pw = 1.0;
    for (double ci : c) {
        s += std::fabs(ci) * pw;
        pw *= az;
    }
    return std::max(s, 1.0);
}

}  // namespace

std::vector<cd> solve_cut_roots(const CutPolynomial& c) {
    const Poly& p = c.coeffs;
    const int d = int(p.size()) - 1;
    if (d < 1) throw std::domain_error("solve_cut_roots: degree must be >= 1");
    double R = 0.0;
    for (int i = 0; i < d; ++i) R = std::max(R, std::fabs(p[i]));
    R = 1.0 + R;  // Cauchy bound (monic)
    std::vector<cd> z(d);
    for (int k = 0; k < d; ++k) {
        const double th = 2.0 * M_PI * k / d + 0.7;
        z[k] = R * cd(std::cos(th), std::sin(th));
    }
    for (int it = 0; it < 500; ++it) {
        double worst = 0.0;
        for (int k = 0; k < d; ++k) {
            auto [pv, dpv] = horner2(p, z[k]);
            if (std::abs(pv) == 0.0) continue;
            if (std::abs(dpv) == 0.0) {
                z[k] += 1e-8 * (1.0 + std::abs(z[k]));
                worst = 1.0;
                continue;
            }
            const cd w = pv / dpv;
            cd s = 0.0;
            for (int j = 0; j < d; ++j)
                if (j != k) s += 1.0 / (z[k] - z[j]);
            const cd delta = w / (1.0 - w * s);
            z[k] -= delta;
            worst = std::max(worst, std::abs(delta) / (1.0 + std::abs(z[k])));
        }
        if (worst < 1e-14) break;
    }
    for (int k = 0; k < d; ++k) {  // Newton polish
        for (int it = 0; it < 4; ++it) {
            auto [pv, dpv] = horner2(p, z[k]);
            if (std::abs(dpv) == 0.0) break;
            z[k] -= pv / dpv;
        }
        if (std::fabs(z[k].imag()) < 1e-10 * (1.0 + std::fabs(z[k].real())))
            z[k] = cd(z[k].real(), 0.0);
    }
    // enforce exact conjugate pairing
    std::vector<int> used(d, 0);
    for (int k = 0; k < d; ++k) {
        if (used[k] || z[k].imag() <= 0.0) continue;
        int best = -1;
        double bd = 1e300;
        for (int j = 0; j < d; ++j) {
            if (used[j] || j == k || z[j].imag() >= 0.0) continue;
            const double dist = std::abs(z[j] - std::conj(z[k]));
            if (dist < bd) {
                bd = dist;
                best = j;
            }
        }
        if (best < 0) throw NumericError("solve_cut_roots: unpaired complex root");
        const cd m = 0.5 * (z[k] + std::conj(z[best]));
        z[k] = m;
        z[best] = std::conj(m);
        used[k] = used[best] = 1;
    }
    for (int k = 0; k < d; ++k) {
        const auto [pv, dpv] = horner2(p, z[k]);
        (void)dpv;
        if (std::abs(pv) > 1e-8 * coeff_scale(p, z[k]))
            throw NumericError("solve_cut_roots: residual bound violated");
    }
    std::sort(z.begin(), z.end(), [](cd a, cd b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return z;
}

BetaSystem beta_system(const ModelParams& p) {
    p.validate();
    const int N = p.n_servers;
    if (N < 3) throw std::domain_error("beta_system requires N >= 3");
    if (!(p.r > 0.0)) throw std::domain_error("beta_system requires r > 0");
    const double sr = std::sqrt(p.r);
    BetaSystem bs;
    bs.n_servers = N;
    bs.r = p.r;
    bs.sigma_roots = solve_cut_roots(cut_polynomial(p));
    const int d = int(bs.sigma_roots.size());  // 2N-3
    bs.alpha.resize(d);
    bs.beta.resize(d);
    for (int l = 0; l < d; ++l) {
        bs.alpha[l] = (p.mu1() - 1.0 - bs.sigma_roots[l]) / (2.0 * sr);
        const cd a = bs.alpha[l];
        const cd sq = std::sqrt(a * a - 1.0);
        const cd b1 = -a + sq, b2 = -a - sq;  // reciprocal pair
        bs.beta[l] = (std::abs(b1) <= std::abs(b2)) ? b1 : b2;
        if (std::abs(bs.beta[l]) > 1.0 - 1e-12)
            throw NumericError("beta_system: root on or outside the unit circle");
    }
    bs.gamma.resize(d);
    cd c0 = 0.0;
    for (int k = 0; k < d; ++k) {
        cd D = 1.0;
        for (int l = 0; l < d; ++l) {
            if (l == k) continue;
            D *= (bs.beta[k] - bs.beta[l]) * (bs.beta[k] - 1.0 / bs.beta[l]);
        }
        if (std::abs(D) == 0.0)
            throw NumericError("beta_system: coincident roots");
        const cd bk = bs.beta[k];
        bs.gamma[k] = std::pow(bk, 2 * N - 5) * (1.0 - bk * bk) / D;
        c0 -= bs.gamma[k];
    }
    bs.c0 = c0;
    return bs;
}

cd generating_function(const BetaSystem& bs, cd z) {
    const int N = bs.n_servers;
    cd num = std::pow(z, 2 * (N - 3)) * (1.0 - z * z) * (1.0 - z * z);
    cd den = 1.0;
    for (const cd& a : bs.alpha) den *= z * z + 2.0 * a * z + 1.0;
    return num / den;
}

namespace {

double ln_mu_product(const ModelParams& p) {  // ln prod_{k=2}^{N-1} mu_k
    double s = 0.0;
    for (int k = 2; k <= p.n_servers - 1; ++k) s += std::log(p.mu(k));
    return s;
}

// bracketed series sum for N >= 3 at bessel argument X = 2 sqrt(r) t:
// c0 Ihat_0(X) + 2 sum_{n>=1} c_n Ihat_n(X) with c_n = -sum_k beta_k^n gamma_k
double scaled_sum(const BetaSystem& bs, double X) {
    if (X < 1e-12) return bs.c0.real();
    const int K = int(bs.beta.size());
    double beta_max = 0.0;
    for (const cd& b : bs.beta) beta_max = std::max(beta_max, std::abs(b));
    int nmax = 128;
    for (;;) {
        const auto seq = specfun::bessel_i_scaled_seq(X, nmax);
        cd S = bs.c0 * seq[0];
        double tail = 0.0;
        for (int k = 0; k < K; ++k) {
            cd pw = 1.0, inner = 0.0;
            for (int n = 1; n <= nmax; ++n) {
                pw *= bs.beta[k];
                inner += pw * seq[n];
            }
            S -= 2.0 * bs.gamma[k] * inner;
            const double ab = std::abs(bs.beta[k]);
            tail += 2.0 * std::abs(bs.gamma[k]) * std::abs(pw) * ab /
                    (1.0 - ab) * seq[nmax];
        }
        if (tail <= 1e-16 * (std::abs(S) + 1e-300) || nmax > 2000000)
            return S.real();
        nmax *= 2;
    }
}

// cut density with the e^{-x_minus t} factor removed (finite for every t)
double cut_pdf_scaled(const ModelParams& p, const BetaSystem& bs, double t) {
    const int N = p.n_servers;
    const double sr = std::sqrt(p.r);
    const double X = 2.0 * sr * t;
    if (N == 1) {
        if (X < 1e-4) return std::exp(-X) * (1.0 + X * X / 8.0);
        return specfun::bessel_i_scaled(1, X) / (sr * t);
    }
    if (N == 2) {
        const double beta1 = (p.r <= 0.25) ? 2.0 * sr : 0.5 / sr;
        double S = 0.0;
        if (X >= 1e-12 && std::fabs(p.r - 0.25) > 0.0) {
            int nmax = 128;
            for (;;) {
                const auto seq = specfun::bessel_i_scaled_seq(X, nmax);
                double acc = 0.0, pw = 1.0;
                for (int n = 1; n <= nmax; ++n) {
                    pw *= beta1;
                    acc += pw * seq[n];
                }
                const double tail = pw * beta1 / (1.0 - beta1) * seq[nmax];
                if (beta1 >= 1.0 - 1e-12 || tail <= 1e-16 * (std::fabs(acc) + 1e-300) ||
                    nmax > 2000000) {
                    S = acc;
                    break;
                }
                nmax *= 2;
            }
        }
        const auto i01 = (X < 1e-12) ? std::vector<double>{1.0, 0.0}
                                     : specfun::bessel_i_scaled_seq(X, 1);
        return sr * (beta1 * i01[0] + i01[1] - (1.0 / beta1 - beta1) * S);
    }
    const double pref = 0.5 * sr * std::exp(ln_mu_product(p));
    return pref * scaled_sum(bs, X);
}

}  // namespace

double pdf_marcum(const ModelParams& p, const BetaSystem& bs, double t) {
    if (t < 0.0) throw std::domain_error("pdf_marcum requires t >= 0");
    const double xm = (1.0 - std::sqrt(p.r)) * (1.0 - std::sqrt(p.r));
    return std::exp(-xm * t) * cut_pdf_scaled(p, bs, t);
}

double pdf_bessel_series(const ModelParams& p, const BetaSystem& bs, double t) {
    if (p.n_servers < 3) throw std::domain_error("pdf_bessel_series requires N >= 3");
    const double sr = std::sqrt(p.r);
    const double X = 2.0 * sr * t;
    if (X > 600.0) throw NumericError("pdf_bessel_series: argument too large");
    const double pref = 0.5 * sr * std::exp(ln_mu_product(p));
    const double e = std::exp(-(1.0 + p.r) * t);
    if (X < 1e-12) return pref * e * bs.c0.real();
    const int K = int(bs.beta.size());
    std::vector<cd> pw(K, 1.0);
    cd S = bs.c0 * std::cyl_bessel_i(0.0, X);
    int quiet = 0;
    for (int n = 1; n <= 20000; ++n) {
        const double In = std::cyl_bessel_i(double(n), X);
        cd add = 0.0;
        for (int k = 0; k < K; ++k) {
            pw[k] *= bs.beta[k];
            add += bs.gamma[k] * pw[k];
        }
        S -= 2.0 * add * In;
        if (n > X && std::abs(2.0 * add * In) < 1e-17 * (std::abs(S) + 1e-300)) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
    }
    return pref * e * S.real();
}

double pdf_marcum_direct(const ModelParams& p, const BetaSystem& bs, double t) {
    if (p.n_servers < 3) throw std::domain_error("pdf_marcum_direct requires N >= 3");
    const double sr = std::sqrt(p.r);
    const double X = 2.0 * sr * t;
    const double pref = 0.5 * sr * std::exp(ln_mu_product(p));
    const double xm = (1.0 - sr) * (1.0 - sr);
    if (X < 1e-12) return pref * bs.c0.real();
    const int K = int(bs.beta.size());
    cd S = 0.0;
    for (int k = 0; k < K; ++k) {
        const cd a = std::sqrt(X / bs.beta[k]);
        const cd b = std::sqrt(X * bs.beta[k]);
        const cd ek = (bs.sigma_roots[k] - p.r - p.mu1()) * t;
        const cd env = -0.5 * (a - b) * (a - b);
        if (std::fabs(ek.real()) > 690.0 || std::fabs(env.real()) > 690.0)
            throw NumericError("pdf_marcum_direct: exponent overflow; use pdf_marcum");
        S += bs.gamma[k] * std::exp(ek) * specfun::marcum_qbar(a, b);
    }
    const double i0part = bs.c0.real() * std::exp(-xm * t) *
                          specfun::bessel_i_scaled(0, X);
    return pref * (i0part - 2.0 * S.real());
}

double pdf_n1(const ModelParams& p, double t) {
    if (p.n_servers != 1) throw std::domain_error("pdf_n1 requires N = 1");
    if (t < 0.0) throw std::domain_error("pdf_n1 requires t >= 0");
    const double sr = std::sqrt(p.r);
    const double xm = (1.0 - sr) * (1.0 - sr);
    return std::exp(-xm * t) * cut_pdf_scaled(p, BetaSystem{}, t);
}

double pdf_n2(const ModelParams& p, double t) {
    if (p.n_servers != 2) throw std::domain_error("pdf_n2 requires N = 2");
    if (t < 0.0) throw std::domain_error("pdf_n2 requires t >= 0");
    const double sr = std::sqrt(p.r);
    const double xm = (1.0 - sr) * (1.0 - sr);
    return std::exp(-xm * t) * cut_pdf_scaled(p, BetaSystem{}, t);
}

ComplexPoleDistribution complexpole_distribution(const ModelParams& p) {
    p.validate();
    if (!(p.r > 0.0))
        throw std::domain_error("complexpole_distribution requires r > 0");
    const int N = p.n_servers;
    ComplexPoleDistribution d;
    d.params = p;
    const double xm = (1.0 - std::sqrt(p.r)) * (1.0 - std::sqrt(p.r));
    std::vector<double> real_roots;
    if (N >= 3) {
        d.bs = beta_system(p);
        for (const cd& sg : d.bs.sigma_roots)
            if (sg.imag() == 0.0) real_roots.push_back(sg.real() - p.r - p.mu1());
    } else if (N == 2) {
        const auto dp0 = d_polynomials(p);
        const Poly dd = dplus_dminus(p, dp0);
        if (dd.size() == 2 && dd[1] != 0.0) real_roots.push_back(-dd[0] / dd[1]);
    }
    if (N >= 2) {
        const auto dp0 = d_polynomials(p);
        for (double s : real_roots) {
            if (!(s > -xm + 1e-10 && s < -1e-12)) continue;
            const auto [dm, dpl] = d_factors(p, dp0, s);
            if (std::fabs(dm) >= std::fabs(dpl)) continue;  // conjugate-factor root
            const double res = algebraic_pole_residue(p, dp0, s);
            if (!std::isfinite(res)) continue;
            d.poles.zeta.push_back(s);
            d.poles.weight.push_back(res / std::fabs(s));
        }
    }
    return d;
}

double ComplexPoleDistribution::pdf(double t) const {
    double v = std::exp(-(1.0 - std::sqrt(params.r)) * (1.0 - std::sqrt(params.r)) * t) *
               cut_pdf_scaled(params, bs, t);
    for (std::size_t l = 0; l < poles.zeta.size(); ++l)
        v += poles.weight[l] * std::fabs(poles.zeta[l]) * std::exp(poles.zeta[l] * t);
    return v;
}

double ComplexPoleDistribution::sf(double t) const {
    if (t < 0.0) throw std::domain_error("sf requires t >= 0");
    const double xm = (1.0 - std::sqrt(params.r)) * (1.0 - std::sqrt(params.r));
    if (xm < 1e-8)
        throw NumericError("complexpole sf: unsupported near r = 1");
    // integrate the cut density over [t, inf) on geometrically growing panels
    // with 20-point Gauss-Legendre; the e^{-x_minus u} factor terminates the sum
    static const double gx[10] = {
        0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
        0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
        0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
        0.9931285991850949};
    static const double gw[10] = {
        0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
        0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
        0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
        0.0176140071391521};
    auto f = [&](double u) {
        return std::exp(-xm * u) * cut_pdf_scaled(params, bs, u);
    };
    double cut = 0.0, a = 0.0, len = std::min(1.0, 10.0 / xm);
    for (int panel = 0; panel < 400; ++panel) {
        const double b = a + len;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double acc = 0.0;
        for (int i = 0; i < 10; ++i)
            acc += gw[i] * (f(t + c - h * gx[i]) + f(t + c + h * gx[i]));
        acc *= h;
        cut += acc;
        a = b;
        len *= 2.0;
        if (std::fabs(acc) < 1e-15 * (std::fabs(cut) + 1e-300) && xm * (t + a) > 40.0)
            break;
    }
    for (std::size_t l = 0; l < poles.zeta.size(); ++l)
        cut += poles.weight[l] * std::exp(poles.zeta[l] * t);
    return cut;
}

std::string beta_system_json(const BetaSystem& bs) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_servers"] = bs.n_servers;
    j["r"] = bs.r;
    auto dump = [](const std::vector<cd>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const cd& z : v) a.push_back({{"re", z.real()}, {"im", z.imag()}});
        return a;
    };
    j["sigma_roots"] = dump(bs.sigma_roots);
    j["alpha"] = dump(bs.alpha);
    j["beta"] = dump(bs.beta);
    j["gamma"] = dump(bs.gamma);
    j["c0"] = {{"re", bs.c0.real()}, {"im", bs.c0.imag()}};
    return j.dump(2);
}

}  // namespace busyper
