#include "busyper/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace busyper {

const char* origin_name(NodeOrigin o) {
    switch (o) {
        case NodeOrigin::pole: return "pole";
        case NodeOrigin::cut: return "cut";
        case NodeOrigin::asymptotic: return "asymptotic";
    }
    return "?";
}

NodeOrigin origin_from_name(const std::string& name) {
    if (name == "pole") return NodeOrigin::pole;
    if (name == "cut") return NodeOrigin::cut;
    if (name == "asymptotic") return NodeOrigin::asymptotic;
    throw std::domain_error("unknown node origin: " + name);
}

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double ExponentialMixture::total_weight() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.w;
    return s;
}

double ExponentialMixture::mean() const {
    double s = 0.0;
    for (const auto& n : nodes) s += n.u * n.w;
    return s;
}

double ExponentialMixture::sf(double t) const {
    if (t < 0.0) throw std::domain_error("sf requires t >= 0");
    double s = 0.0;
    for (const auto& n : nodes) s += n.w * std::exp(-t / n.u);
    return s;
}

double ExponentialMixture::pdf(double t) const {
    if (t < 0.0) throw std::domain_error("pdf requires t >= 0");
    double s = 0.0;
    for (const auto& n : nodes) s += (n.w / n.u) * std::exp(-t / n.u);
    return s;
}

double ExponentialMixture::sample(std::mt19937_64& rng) const {
    if (nodes.empty()) throw std::domain_error("empty mixture");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double tot = total_weight();
    double target = unif(rng) * tot, acc = 0.0;
    double u = nodes.back().u;
    for (const auto& n : nodes) {
        acc += n.w;
        if (acc >= target) { u = n.u; break; }
    }
    // inverse-CDF exponential draw
    double v = -std::log1p(-unif(rng));
    return u * v;
}

void ExponentialMixture::validate() const {
    for (const auto& n : nodes) {
        if (!(n.u > 0.0)) throw NumericError("mixture node scale must be positive");
        if (n.w < -1e-12) throw NumericError("mixture weight below -1e-12");
    }
    if (std::abs(total_weight() - 1.0) > 1e-8)
        throw NumericError("mixture weights do not sum to 1 within 1e-8");
}

std::string ExponentialMixture::to_csv() const {
    std::ostringstream os;
    os << "node,weight,origin\n";
    for (const auto& n : nodes)
        os << format_g17(n.u) << ',' << format_g17(n.w) << ',' << origin_name(n.origin) << '\n';
    return os.str();
}

ExponentialMixture ExponentialMixture::from_csv(const std::string& text) {
    ExponentialMixture m;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw std::domain_error("empty CSV");
    if (line != "node,weight,origin") throw std::domain_error("bad CSV header: " + line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::domain_error("bad CSV row: " + line);
        MixtureNode n;
        n.u = std::stod(line.substr(0, c1));
        n.w = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        n.origin = origin_from_name(line.substr(c2 + 1));
        m.nodes.push_back(n);
    }
    return m;
}

std::string ExponentialMixture::to_json(int indent) const {
    nlohmann::json j;
    j["schema_version"] = 1;
    auto& arr = j["nodes"];
    arr = nlohmann::json::array();
    for (const auto& n : nodes)
        arr.push_back({{"node", n.u}, {"weight", n.w}, {"origin", origin_name(n.origin)}});
    return j.dump(indent);
}

}  // namespace busyper
