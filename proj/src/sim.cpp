#include "busyper/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "busyper/stats.hpp"

namespace busyper {

namespace {
constexpr double kEulerGamma = 0.57721566490153286;
}

SimResult simulate_bp(const SimConfig& cfg) {
    const ModelParams& p = cfg.params;
    p.validate();
    if (!(p.r > 0.0 && p.r < 1.0))
        throw std::domain_error("simulate_bp requires 0 < r < 1");
    if (!(cfg.t_stop > 0.0)) throw std::domain_error("simulate_bp: t_stop must be > 0");
    const int N = p.n_servers;
    const double t_scl = 1.0 / N;  // treatment units per internal unit
    const double cycle = (exact_mean(p) + 1.0 / p.r) * t_scl;
    if (cfg.t_stop / cycle < cfg.min_expected_bps)
        throw InsufficientDataError(
            "simulate_bp: horizon shorter than " +
            std::to_string(cfg.min_expected_bps) + " expected regeneration cycles");

    // treatment-time units: per-server service rate 1, arrival rate N r
    const double lam = N * p.r;
    std::mt19937_64 rng(cfg.seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SimResult out;
    double t = 0.0;
    int n = 0;
    double bp_start = 0.0;
    while (t < cfg.t_stop) {
        if (n == 0) {
            t += expo(rng) / lam;  // idle stretch
            n = 1;
            bp_start = t;
            continue;
        }
        const double down = std::min(n, N);
        const double total = lam + down;
        t += expo(rng) / total;
        if (unif(rng) * total < lam) {
            ++n;
        } else {
            --n;
            if (n == 0 && t < cfg.t_stop) {
                out.bp.push_back(t - bp_start);
                ++out.n_cycles;
            }
        }
    }
    out.t_used = cfg.t_stop;
    if (out.bp.size() < 2)
        throw InsufficientDataError("simulate_bp: fewer than 2 completed busy periods");
    return out;
}

std::vector<double> nn_entropy_ensemble(const std::vector<double>& sample) {
    const std::size_t M = sample.size();
    if (M < 2) throw InsufficientDataError("nn_entropy: need at least 2 points");
    std::vector<double> x = sample;
    std::sort(x.begin(), x.end());
    std::vector<double> e(M);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < M; ++i) {
        const double dl = (i > 0) ? x[i] - x[i - 1] : inf;
        const double dr = (i + 1 < M) ? x[i + 1] - x[i] : inf;
        const double rho = std::min(dl, dr);
        e[i] = std::log((M - 1) * rho);  // -inf on duplicates
    }
    return e;
}

double nn_entropy(const std::vector<double>& sample) {
    const auto e = nn_entropy_ensemble(sample);
    double s = 0.0;
    for (double v : e) s += v;
    return s / e.size() + std::log(2.0) + kEulerGamma;
}

namespace {

double stat_value(const std::vector<double>& x, Statistic stat) {
    double s = 0.0;
    switch (stat) {
        case Statistic::mean:
            for (double v : x) s += v;
            return s / x.size();
        case Statistic::logmean:
            for (double v : x) s += std::log(v);
            return s / x.size();
        case Statistic::entropy:
            return nn_entropy(x);
    }
    throw std::domain_error("unknown statistic");
}

}  // namespace

BootstrapCI bootstrap_ci(const std::vector<double>& sample, Statistic stat,
                         std::uint64_t seed, int B, double alpha,
                         EntropyStrategy strategy) {
    if (sample.size() < 2)
        throw InsufficientDataError("bootstrap_ci: need at least 2 points");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
    BootstrapCI ci;
    ci.point = stat_value(sample, stat);
    std::vector<double> reps;
    reps.reserve(B);
    const bool ensemble =
        (stat == Statistic::entropy && strategy == EntropyStrategy::nn_ensemble);
    // entropy on resampled data repeats points; bootstrap the summand
    // ensemble instead, or deduplicate each resample
    std::vector<double> ens;
    if (ensemble) ens = nn_entropy_ensemble(sample);
    std::vector<double> buf;
    for (int b = 0; b < B; ++b) {
        buf.clear();
        if (ensemble) {
            double s = 0.0;
            for (std::size_t i = 0; i < ens.size(); ++i) s += ens[pick(rng)];
            reps.push_back(s / ens.size() + std::log(2.0) + kEulerGamma);
            continue;
        }
        for (std::size_t i = 0; i < sample.size(); ++i) buf.push_back(sample[pick(rng)]);
        if (stat == Statistic::entropy) {
            std::sort(buf.begin(), buf.end());
            buf.erase(std::unique(buf.begin(), buf.end()), buf.end());
            if (buf.size() < 2) {
                --b;
                continue;
            }
        }
        reps.push_back(stat_value(buf, stat));
    }
    std::sort(reps.begin(), reps.end());
    auto quantile = [&](double q) {
        const double pos = q * (reps.size() - 1);
        const std::size_t i = std::size_t(pos);
        const double f = pos - i;
        return (i + 1 < reps.size()) ? (1.0 - f) * reps[i] + f * reps[i + 1] : reps[i];
    };
    ci.lo = quantile(alpha / 2.0);
    ci.hi = quantile(1.0 - alpha / 2.0);
    return ci;
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& sf) {
    if (sample.empty()) throw InsufficientDataError("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = double(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = 1.0 - sf(sample[i]);
        d = std::max(d, std::fabs(F - double(i) / n));
        d = std::max(d, std::fabs(F - double(i + 1) / n));
    }
    return d;
}

double ks_critical(std::size_t n, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0) / double(n));
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw InsufficientDataError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0) * (n + m) / (double(n) * m));
}

}  // namespace busyper
