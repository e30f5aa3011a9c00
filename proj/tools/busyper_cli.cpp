// Command-line front end: distributions, reference tables, statistic sweeps,
// simulation runs and the diagnostic battery.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "busyper/algebraic.hpp"
#include "busyper/asymptotics.hpp"
#include "busyper/cliutil.hpp"
#include "busyper/complexpole.hpp"
#include "busyper/model.hpp"
#include "busyper/sim.hpp"
#include "busyper/spectral.hpp"
#include "busyper/stats.hpp"

namespace {

namespace fs = std::filesystem;
using namespace busyper;

constexpr int kExitOk = 0, kExitUsage = 2, kExitNumeric = 3, kExitNoData = 4;

fs::path out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("BUSYPER_OUTDIR")) return env;
    return ".";
}

std::string g17(double x) { return format_g17(x); }

struct DistEval {
    std::function<double(double)> pdf, sf;
    std::string sidecar;
};

DistEval make_dist(const ModelParams& p, const std::string& method) {
    if (method == "spectral") {
        auto d = std::make_shared<BusyPeriodDistribution>(bp_distribution(p));
        return {[d](double t) { return d->pdf(t); },
                [d](double t) { return d->sf(t); },
                std::string("{\"mixture\":") + d->mixture.to_json() +
                    ",\"diagnostics\":" +
                    (p.n_servers >= 2 ? diagnostics_json(p) : std::string("null")) + "}"};
    }
    if (method == "complexpole") {
        auto d = std::make_shared<ComplexPoleDistribution>(complexpole_distribution(p));
        std::string side = "{\"beta_system\":";
        side += (p.n_servers >= 3) ? beta_system_json(d->bs) : std::string("null");
        side += "}";
        return {[d](double t) { return d->pdf(t); },
                [d](double t) { return d->sf(t); }, side};
    }
    if (method == "asymptotic") {
        auto m = std::make_shared<ExponentialMixture>(mminf_mixture(p.rho()));
        // asymptotic nodes are in mean-treatment units; convert to internal
        for (auto& n : m->nodes) n.u *= p.n_servers;
        return {[m](double t) { return m->pdf(t); },
                [m](double t) { return m->sf(t); },
                std::string("{\"mixture\":") + m->to_json() + "}"};
    }
    throw CLI::ValidationError("--method", "unknown method: " + method);
}

int cmd_dist(int n, double r, const std::string& method, double tmax, int points,
             const std::string& out) {
    ModelParams p{n, r, 1.0};
    p.validate();
    DistEval d = make_dist(p, method);
    if (tmax <= 0.0) tmax = (r > 0.0 && r < 1.0) ? 10.0 * exact_mean(p) : 10.0 * n;
    const fs::path dir = out_dir(out);
    fs::create_directories(dir);
    const std::string stem =
        "dist_n" + std::to_string(n) + "_r" + g17(r) + "_" + method;
    std::ofstream csv(dir / (stem + ".csv"));
    csv << "t,pdf,sf,hazard\n";
    for (int i = 0; i < points; ++i) {
        const double t = tmax * i / (points - 1);
        const double pdf = d.pdf(t), sf = d.sf(t);
        csv << g17(t) << ',' << g17(pdf) << ',' << g17(sf) << ','
            << g17(sf > 0.0 ? pdf / sf : 0.0) << '\n';
    }
    std::ofstream(dir / (stem + ".json")) << d.sidecar << '\n';
    std::cout << "wrote " << (dir / stem).string() << ".{csv,json}\n";
    return kExitOk;
}

int cmd_tables(const std::string& out) {
    const fs::path dir = out_dir(out);
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "critical_r.csv");
        csv << "N,r_c\n";
        for (int n = 1; n <= 6; ++n) {
            const double rc = critical_r(n);
            csv << n << ',' << g17(rc) << '\n';
            std::cout << "r_c(" << n << ") = " << g17(rc) << '\n';
        }
    }
    {
        std::ofstream csv(dir / "d_polynomials.csv");
        csv << "N,poly,degree,coefficients_ascending_in_s\n";
        for (int n = 2; n <= 4; ++n) {
            ModelParams p{n, 0.5, 1.0};
            const auto dp = d_polynomials(p);
            auto row = [&](const char* name, const Poly& q) {
                csv << n << ',' << name << ',' << q.size() - 1 << ',';
                for (std::size_t i = 0; i < q.size(); ++i)
                    csv << (i ? " " : "") << g17(q[i]);
                csv << '\n';
            };
            row("D0", dp.d0);
            row("D1", dp.d1);
        }
    }
    std::cout << "wrote " << (dir / "critical_r.csv").string() << ", "
              << (dir / "d_polynomials.csv").string() << '\n';
    return kExitOk;
}

int cmd_sweep(const std::string& stat, int n_min, int n_max, double r_min,
              double r_max, double r_step, const std::string& out) {
    const fs::path dir = out_dir(out);
    fs::create_directories(dir);
    std::ofstream csv(dir / ("sweep_" + stat + ".csv"));
    csv << "N,r,statistic,method,value,value_logcompressed\n";
    for (int n = n_min; n <= n_max; ++n) {
        for (double r = r_min; r <= r_max + 1e-12; r += r_step) {
            ModelParams p{n, r, 1.0};
            const auto d = bp_distribution(p);
            double v;
            if (stat == "mean")
                v = mixture_mean(d.mixture);
            else if (stat == "logmean")
                v = mixture_logmean(d.mixture);
            else if (stat == "entropy")
                v = mixture_entropy(d.mixture);
            else
                throw CLI::ValidationError("--stat", "unknown statistic: " + stat);
            csv << n << ',' << g17(r) << ',' << stat << ",spectral," << g17(v)
                << ',' << g17(logcompress(v)) << '\n';
        }
    }
    std::cout << "wrote " << (dir / ("sweep_" + stat + ".csv")).string() << '\n';
    return kExitOk;
}

int cmd_simulate(int n, double r, double t_stop, std::uint64_t seed,
                 const std::string& out) {
    SimConfig cfg{{n, r, 1.0}, t_stop, seed, 10};
    const SimResult res = simulate_bp(cfg);
    const fs::path dir = out_dir(out);
    fs::create_directories(dir);
    const std::string stem = "sim_n" + std::to_string(n) + "_r" + g17(r) + "_seed" +
                             std::to_string(seed);
    {
        std::ofstream csv(dir / (stem + ".csv"));
        csv << "# n_servers=" << n << " r=" << g17(r) << " t_stop=" << g17(t_stop)
            << " seed=" << seed << "\nduration\n";
        for (double d : res.bp) csv << g17(d) << '\n';
    }
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_servers"] = n;
    j["r"] = r;
    j["seed"] = seed;
    j["n_cycles"] = res.n_cycles;
    int which = 0;
    for (auto stat : {Statistic::mean, Statistic::logmean, Statistic::entropy}) {
        const char* names[] = {"mean", "logmean", "entropy"};
        const auto ci = bootstrap_ci(res.bp, stat, seed + 1000 + which);
        j["ci"][names[which]] = {{"point", ci.point}, {"lo", ci.lo}, {"hi", ci.hi}};
        ++which;
    }
    std::ofstream(dir / (stem + ".json")) << j.dump(2) << '\n';
    std::cout << "wrote " << (dir / stem).string() << ".{csv,json} ("
              << res.bp.size() << " busy periods)\n";
    return kExitOk;
}

int validate_cell(int n, double r, bool verbose) {
    ModelParams p{n, r, 1.0};
    if (n == 1) {  // no spectral battery; check mixture normalization and mean
        const auto d = bp_distribution(p);
        d.mixture.validate();
        if (r > 0.0 && r < 1.0 &&
            std::fabs(mixture_mean(d.mixture) / exact_mean(p) - 1.0) > 1e-6) {
            std::cout << "FAIL N=1 r=" << g17(r) << " mean_identity\n";
            return 1;
        }
        return 0;
    }
    const std::string diag = diagnostics_json(p);
    const auto j = nlohmann::json::parse(diag);
    if (verbose) {
        std::cout << diag << '\n';
        SpectralEngine eng(p);
        std::cout << "pole count: " << eng.count_poles() << '\n';
    }
    if (!j["all_pass"].get<bool>()) {
        for (const auto& item : j["checks"].items())
            if (!item.value()["pass"].get<bool>())
                std::cout << "FAIL N=" << n << " r=" << g17(r) << ' ' << item.key()
                          << " residual=" << item.value()["residual"] << '\n';
        return 1;
    }
    return 0;
}

int cmd_validate(int n, double r, bool grid) {
    int failures = 0;
    if (grid) {
        for (int nn = 1; nn <= 60; ++nn)
            for (int ri = 1; ri <= 19; ++ri) failures += validate_cell(nn, 0.05 * ri, false);
        std::cout << (failures ? "FAIL" : "PASS") << " grid validation, " << failures
                  << " failing cells\n";
    } else {
        failures = validate_cell(n, r, true);
        std::cout << (failures ? "FAIL" : "PASS") << " N=" << n << " r=" << g17(r)
                  << '\n';
    }
    return failures ? kExitNumeric : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact M/M/c partial busy period distributions"};
    app.require_subcommand(1);

    int n = 1, points = 50, n_min = 1, n_max = 10;
    double r = 0.5, tmax = 0.0, r_min = 0.05, r_max = 0.95, r_step = 0.05;
    double t_stop = 1e6;
    std::uint64_t seed = 1;
    std::string method = "spectral", out, stat = "mean";
    bool grid = false;

    auto* dist = app.add_subcommand("dist", "distribution on a time grid");
    dist->add_option("--n", n, "number of servers")->required();
    dist->add_option("--r", r, "traffic intensity")->required();
    dist->add_option("--method", method, "spectral|complexpole|asymptotic");
    dist->add_option("--tmax", tmax, "grid end (default 10x mean)");
    dist->add_option("--points", points, "grid size");
    dist->add_option("--out", out, "output directory");

    auto* tables = app.add_subcommand("tables", "critical intensities and polynomials");
    tables->add_option("--out", out, "output directory");

    auto* sweep = app.add_subcommand("sweep", "statistic over an (N, r) grid");
    sweep->add_option("--stat", stat, "mean|logmean|entropy")->required();
    sweep->add_option("--n-min", n_min);
    sweep->add_option("--n-max", n_max);
    sweep->add_option("--r-min", r_min);
    sweep->add_option("--r-max", r_max);
    sweep->add_option("--r-step", r_step);
    sweep->add_option("--out", out, "output directory");

    auto* sim = app.add_subcommand("simulate", "busy-period simulation + bootstrap CIs");
    sim->add_option("--n", n)->required();
    sim->add_option("--r", r)->required();
    sim->add_option("--t-stop", t_stop, "horizon, mean-treatment units");
    sim->add_option("--seed", seed);
    sim->add_option("--out", out, "output directory");

    auto* val = app.add_subcommand("validate", "diagnostic battery");
    val->add_option("--n", n);
    val->add_option("--r", r);
    val->add_flag("--grid", grid, "full N=1..60, r=0.05..0.95 grid");

    try {
        app.parse(argc, argv);
        if (dist->parsed()) return cmd_dist(n, r, method, tmax, points, out);
        if (tables->parsed()) return cmd_tables(out);
        if (sweep->parsed())
            return cmd_sweep(stat, n_min, n_max, r_min, r_max, r_step, out);
        if (sim->parsed()) return cmd_simulate(n, r, t_stop, seed, out);
        if (val->parsed()) return cmd_validate(n, r, grid);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const busyper::InsufficientDataError& e) {
        std::cerr << "insufficient data: " << e.what() << '\n';
        return kExitNoData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
}
