#include "busyper/stats.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "busyper/specfun.hpp"

namespace busyper {

namespace {
constexpr double kEulerGamma = 0.57721566490153286;
}

double exact_mean(const ModelParams& p) {
    p.validate();
    if (p.r >= 1.0) throw std::domain_error("exact_mean diverges for r >= 1");
    if (p.r == 0.0) return double(p.n_servers);
    const int N = p.n_servers;
    const double lnNr = std::log(N * p.r);
    double t1 = std::exp(N * lnNr - std::lgamma(N + 1.0)) / (1.0 - p.r);
    double s = 0.0;
    for (int k = 1; k < N; ++k) s += std::exp(k * lnNr - std::lgamma(k + 1.0));
    return (t1 + s) / p.r;
}

double mixture_mean(const ExponentialMixture& m) { return m.mean(); }

double mixture_logmean(const ExponentialMixture& m) {
    double s = 0.0;
    for (const auto& n : m.nodes) s += n.w * std::log(n.u);
    return s - kEulerGamma;
}

namespace {

double entropy_once(const ExponentialMixture& m, int L_quad) {
    // -int P ln P dt on geometrically growing Simpson panels (L_quad
    // subintervals each), from below the fastest node scale out to where the
    // slowest exponential has decayed past any relevance.  ln P evaluated by
    // log-sum-exp so node scales may differ by many orders.  Skips
    // non-positive weights (tolerated at the -1e-12 level, negligible mass).
    std::vector<double> lnrate, rate;
    double umin = std::numeric_limits<double>::infinity(), umax = 0.0;
    for (const auto& n : m.nodes) {
        if (n.w <= 0.0) continue;
        lnrate.push_back(std::log(n.w / n.u));
        rate.push_back(1.0 / n.u);
        umin = std::min(umin, n.u);
        umax = std::max(umax, n.u);
    }
    const std::size_t K = rate.size();
    auto neg_plnp = [&](double t) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k)
            best = std::max(best, lnrate[k] - t * rate[k]);
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            acc += std::exp(lnrate[k] - t * rate[k] - best);
        const double lnp = best + std::log(acc);
        return -std::exp(lnp) * lnp;
    };
    const int n = L_quad + (L_quad % 2);  // Simpson needs an even count
    const double t_end = 80.0 * umax;     // tail bound ~ 80 e^{-80}
    double H = 0.0, a = 0.0, width = 1e-3 * umin;
    while (a < t_end) {
        const double b = std::min(t_end, a + width);
        const double h = (b - a) / n;
        double s = neg_plnp(a) + neg_plnp(b);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * neg_plnp(a + i * h);
        H += s * h / 3.0;
        a = b;
        width *= 1.5;
    }
    return H;
}

}  // namespace

double mixture_entropy(const ExponentialMixture& m, int L_quad) {
    if (L_quad < 32) throw std::domain_error("mixture_entropy: L_quad must be >= 32");
    const double h1 = entropy_once(m, L_quad);
    const double h2 = entropy_once(m, 2 * L_quad);
    if (std::fabs(h2 - h1) > 1e-6)
        throw NumericError("mixture_entropy: quadrature not converged at requested size");
    return h2;
}

double hazard(const BusyPeriodDistribution& d, double t) {
    if (t < 0.0) throw std::domain_error("hazard requires t >= 0");
    const double sf = d.sf(t);
    if (sf < 1e-280)
        throw NumericError("hazard: SF underflow; stay below t where SF > 1e-280");
    return d.pdf(t) / sf;
}

double regeneration_sf(const BusyPeriodDistribution& d, double t) {
    if (t < 0.0) throw std::domain_error("regeneration_sf requires t >= 0");
    const double r = d.params.r;
    if (!(r > 0.0)) throw std::domain_error("regeneration_sf requires r > 0");
    double s = 0.0;
    for (const auto& n : d.mixture.nodes) {
        const double x = 1.0 / n.u;
        if (std::fabs(r - x) < 1e-9)
            s += n.w * (1.0 + x * t) * std::exp(-x * t);  // coincident-rate limit
        else
            s += n.w * (r * std::exp(-x * t) - x * std::exp(-r * t)) / (r - x);
    }
    return s;
}

}  // namespace busyper
