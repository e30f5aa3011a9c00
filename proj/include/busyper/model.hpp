#pragma once

// Core parameter and distribution types shared by all computational engines.
//
// Time convention: mu = 1/N so mu_n = n/N, lambda = r; all internal results
// are in these units.  t_scale converts to physical time, 1/(N*mu_phys).

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace busyper {

// Numeric failure inside an engine (non-convergence, degenerate data, ...).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too little data to produce the requested statistic.
struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelParams {
    int n_servers = 1;      // N >= 1
    double r = 0.5;         // total traffic intensity lambda/(N mu)
    double t_scale = 1.0;   // physical time factor 1/(N mu_phys)

    double mu1() const { return 1.0 / n_servers; }
    double mu(int n) const { return double(n) / n_servers; }
    double rho() const { return n_servers * r; }

    void validate() const {
        if (n_servers < 1) throw std::domain_error("n_servers must be >= 1");
        if (r < 0.0) throw std::domain_error("traffic intensity must be >= 0");
        if (t_scale <= 0.0) throw std::domain_error("t_scale must be > 0");
    }
};

enum class NodeOrigin { pole, cut, asymptotic };

const char* origin_name(NodeOrigin o);
NodeOrigin origin_from_name(const std::string& name);

// Node/weight pair of the texture representation: BP = U * V with V a unit
// exponential and U discrete on {u_l} with masses {w_l}.
struct MixtureNode {
    double u = 1.0;                       // time scale, > 0
    double w = 0.0;                       // probability mass
    NodeOrigin origin = NodeOrigin::pole;
};

struct ExponentialMixture {
    std::vector<MixtureNode> nodes;

    double total_weight() const;
    double mean() const;                  // sum u_l w_l

    // F(t) = sum w_l exp(-t/u_l); P(t) = sum (w_l/u_l) exp(-t/u_l)
    double sf(double t) const;
    double pdf(double t) const;

    // Draw U from the node law, multiply by a unit exponential.
    double sample(std::mt19937_64& rng) const;

    // Engine contract: weights sum to 1, individually >= -1e-12.
    void validate() const;

    // decimal-17 formatting; identical data round-trips byte-exactly
    std::string to_csv() const;
    static ExponentialMixture from_csv(const std::string& text);
    std::string to_json(int indent = -1) const;
};

struct PoleSet {
    std::vector<double> zeta;             // pole locations, in (-x_minus, 0)
    std::vector<double> weight;           // w_l = -mu1 J(zeta_l)/zeta_l
};

struct BusyPeriodDistribution {
    ModelParams params;
    ExponentialMixture mixture;
    PoleSet pole_part;
    double tail_rate = 0.0;               // dominant decay rate, -zeta_1 or x_minus

    double sf(double t) const { return mixture.sf(t); }
    double pdf(double t) const { return mixture.pdf(t); }
};

// Canonical shortest decimal-17 rendering used by every CSV/JSON emitter.
std::string format_g17(double x);

}  // namespace busyper
