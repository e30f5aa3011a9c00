#pragma once

// Continuous-time Markov chain simulation of busy periods, nearest-neighbour
// entropy estimation, bootstrap confidence intervals and Kolmogorov-Smirnov
// comparisons against mixture laws.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "busyper/model.hpp"

namespace busyper {

struct SimConfig {
    ModelParams params;
    double t_stop = 0.0;          // simulated horizon, mean-treatment-time units
    std::uint64_t seed = 1;
    double min_expected_bps = 10; // pre-check on t_stop / mean cycle length
};

struct SimResult {
    std::vector<double> bp;       // completed busy periods, treatment units
    double t_used = 0.0;
    std::uint64_t n_cycles = 0;
};

// race between arrivals (rate N r) and departures (rate min(n, N)) with the
// mean treatment time as the unit; incomplete final busy period is dropped.
// Throws InsufficientDataError when fewer than min_expected_bps cycles fit.
SimResult simulate_bp(const SimConfig& cfg);

// Kozachenko-Leonenko estimate H = mean ln((M-1) rho_i) + ln 2 + gamma_e
// from nearest-neighbour spacings of a sorted copy of the sample
double nn_entropy(const std::vector<double>& sample);

// per-point summands ln((M-1) rho_i); duplicates yield -inf entries
std::vector<double> nn_entropy_ensemble(const std::vector<double>& sample);

enum class Statistic { mean, logmean, entropy };
enum class EntropyStrategy { nn_ensemble, dedupe };

struct BootstrapCI {
    double point = 0.0, lo = 0.0, hi = 0.0;
};

// percentile bootstrap, B resamples at level alpha.  Entropy resamples are
// handled either on the summand ensemble (default) or by deduplicating each
// resample before re-estimating.
BootstrapCI bootstrap_ci(const std::vector<double>& sample, Statistic stat,
                         std::uint64_t seed, int B = 1000, double alpha = 0.01,
                         EntropyStrategy strategy = EntropyStrategy::nn_ensemble);

// one-sample Kolmogorov-Smirnov statistic against a survival function
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& sf);

// asymptotic critical value sqrt(-ln(alpha/2)/2)/sqrt(n)
double ks_critical(std::size_t n, double alpha);

// two-sample statistic and its critical value
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

}  // namespace busyper
