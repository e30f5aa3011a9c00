#include "busyper/asymptotics.hpp"

#include <cmath>
#include <functional>

#include "busyper/spectral.hpp"
#include "busyper/specfun.hpp"
#include "busyper/stats.hpp"

namespace busyper {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;

double bisect_root(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        // zeros of deep modes sit super-exponentially close to the integer
        // endpoints; search geometric insets from both ends for a bracket
        bool found = false;
        for (int k = 1; k <= 13 && !found; ++k) {
            const double h = (b - a) * std::pow(10.0, -k);
            for (double x : {a + h, b - h}) {
                const double fx = f(x);
                if ((fx > 0.0) != (fa > 0.0)) {
                    if (x == a + h) {
                        b = x;
                        fb = fx;
                    } else {
                        a = x;
                        fa = fx;
                    }
                    found = true;
                    break;
                }
            }
        }
        if (!found)  // zero numerically merged with an endpoint
            return (std::fabs(fa) <= std::fabs(fb)) ? a : b;
    }
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

KummerZeros kummer_zeros(double rho, int L) {
    if (!(rho > 0.0)) throw std::domain_error("kummer_zeros requires rho > 0");
    if (L < 1) throw std::domain_error("kummer_zeros requires L >= 1");
    KummerZeros kz;
    kz.chi.reserve(L);
    kz.chi1.reserve(L);
    auto f0 = [rho](double s) { return specfun::kummer_m_reg(s, s + 1.0, rho); };
    auto f1 = [rho](double s) { return specfun::kummer_m_reg(s, s + 2.0, rho); };
    const bool int_rho = (rho == std::floor(rho));
    const int fl = int(std::floor(rho));
    for (int l = 1; l <= L; ++l) {
        kz.chi.push_back(bisect_root(f0, -double(l), -double(l - 1)));
        if (int_rho && l == fl) {
            kz.chi1.push_back(-rho);  // exact zero of the shifted family
        } else if (l <= fl) {
            kz.chi1.push_back(bisect_root(f1, -double(l), -double(l - 1)));
        } else {
            kz.chi1.push_back(bisect_root(f1, -double(l + 1), -double(l)));
        }
    }
    for (int l = 0; l < L; ++l) {  // interlacing sanity (tolerant of merged pairs)
        if (!(kz.chi[l] < 0.0) || !(kz.chi1[l] < kz.chi[l] + 1e-9))
            throw NumericError("kummer_zeros: interlacing violated");
        if (l > 0 && !(kz.chi[l] < kz.chi1[l - 1] + 1e-9))
            throw NumericError("kummer_zeros: interlacing violated");
    }
    return kz;
}

ExponentialMixture mminf_mixture(double rho) {
    int L = 20;
    KummerZeros kz;
    for (;;) {
        kz = kummer_zeros(rho, L);
        if (std::fabs(1.0 - kz.chi1[L - 2] / kz.chi[L - 1]) < 1e-10 || L >= 200)
            break;
        L = std::min(2 * L, 200);
    }
    ExponentialMixture m;
    for (int k = 0; k < L; ++k) {
        // W_k = prod_{l=2}^{L}(1 - chi_k/chi1_{l-1}) / prod_{l != k}(1 - chi_k/chi_l)
        double lnw = 0.0;
        int sgn = 1;
        for (int l = 1; l < L; ++l) {
            const double f = 1.0 - kz.chi[k] / kz.chi1[l - 1];
            lnw += std::log(std::fabs(f));
            if (f < 0.0) sgn = -sgn;
        }
        for (int l = 0; l < L; ++l) {
            if (l == k) continue;
            const double f = 1.0 - kz.chi[k] / kz.chi[l];
            lnw -= std::log(std::fabs(f));
            if (f < 0.0) sgn = -sgn;
        }
        m.nodes.push_back({-1.0 / kz.chi[k], sgn * std::exp(lnw),
                           NodeOrigin::asymptotic});
    }
    m.validate();
    return m;
}

double unity_m_scale(int N) {
    if (N < 1) throw std::domain_error("unity_m_scale requires N >= 1");
    double ln_lam = 0.0;
    for (int k = 2; k <= N - 1; ++k) ln_lam += std::log(double(N) / k);
    return std::exp(2.0 * (ln_lam + std::log(double(N))));
}

double unity_sf(double t, double m) {
    if (t < 0.0 || !(m > 0.0)) throw std::domain_error("unity_sf: bad arguments");
    return specfun::erfcx(std::sqrt(t / m));
}

double unity_pdf(double t, double m) {
    if (!(t > 0.0) || !(m > 0.0)) throw std::domain_error("unity_pdf: bad arguments");
    return 1.0 / std::sqrt(M_PI * t * m) - specfun::erfcx(std::sqrt(t / m)) / m;
}

double unity_logmean(double m) { return std::log(m) - kEulerGamma; }

double TwoExpApprox::sf(double t) const {
    return (1.0 - nu) * std::exp(-t / m_fast) + nu * std::exp(-nu * t / m_slow);
}

double TwoExpApprox::pdf(double t) const {
    return (1.0 - nu) / m_fast * std::exp(-t / m_fast) +
           nu * nu / m_slow * std::exp(-nu * t / m_slow);
}

TwoExpApprox const_r_two_exp(const ModelParams& p) {
    p.validate();
    if (!(p.r > 0.0 && p.r < 1.0))
        throw std::domain_error("const_r_two_exp requires 0 < r < 1");
    SpectralEngine eng(p);
    const PoleSet ps = eng.find_poles();
    if (ps.zeta.empty())
        throw NumericError("const_r_two_exp: no discrete pole at these parameters");
    TwoExpApprox a;
    a.zeta1 = ps.zeta.front();  // poles sorted with the dominant one first
    a.nu = ps.weight.front();
    const double mean = exact_mean(p);
    a.m_fast = (1.0 - a.nu) * p.n_servers;
    a.m_slow = mean - (1.0 - a.nu) * a.m_fast;
    return a;
}

}  // namespace busyper
