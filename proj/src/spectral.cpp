#include "busyper/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>

#include "busyper/eigensolver.hpp"
#include "busyper/stats.hpp"
#include "json.hpp"

namespace busyper {

namespace {
constexpr int kAssocLU = -1000;     // weight from LU/Thomas resolvents (near-zero root)
constexpr int kAssocEdge = -2000;   // degenerate root at the cut edge, zero weight
// assoc >= 0: deflate at asymptote k; assoc in [-n, -1]: underflow limit at k = -1-assoc
}  // namespace

std::pair<double, double> psi_pm(double s, double r) {
    const double b = r + 1.0 + s;
    const double disc = b * b - 4.0 * r;
    if (disc < -1e-12 * std::max(1.0, 4.0 * r))
        throw NumericError("psi_pm: s lies inside the branch cut; real branches undefined");
    const double sq = std::sqrt(std::max(disc, 0.0));
    return {(b + sq) / (2.0 * r), (b - sq) / (2.0 * r)};
}

void build_generator(const ModelParams& p, std::vector<double>& diag,
                     std::vector<double>& offdiag) {
    if (p.n_servers < 2) throw std::domain_error("build_generator requires N >= 2");
    const int n = p.n_servers - 1;
    diag.resize(n);
    offdiag.resize(n - 1);
    for (int k = 1; k <= n; ++k) diag[k - 1] = -(p.r + p.mu(k));
    for (int k = 2; k <= n; ++k) offdiag[k - 2] = std::sqrt(p.r * p.mu(k));
}

SpectralEngine::SpectralEngine(const ModelParams& p) : p_(p) {
    p_.validate();
    if (p_.n_servers < 2) throw std::domain_error("SpectralEngine requires N >= 2");
    const int N = p_.n_servers;
    n_ = N - 1;
    r_ = p_.r;
    mu1_ = p_.mu1();
    xm_ = (1.0 - std::sqrt(r_)) * (1.0 - std::sqrt(r_));

    std::vector<double> d, e;
    build_generator(p_, d, e);
    auto eig = eig_tridiag(d, e);
    sd_.xi = eig.values;
    sd_.v11.resize(n_);
    sd_.v12.resize(n_);
    sd_.v22.resize(n_);
    for (int j = 0; j < n_; ++j) {
        const double first = eig.vec(0, j), last = eig.vec(n_ - 1, j);
        sd_.v11[j] = first * first;
        sd_.v12[j] = first * last;
        sd_.v22[j] = last * last;
    }
    sd_.ln_lambda = 0.0;
    for (int k = 2; k <= n_; ++k) sd_.ln_lambda += std::log(r_ / p_.mu(k));

    // completeness sums of the raw orthonormal QL basis; the later residue
    // refinement of the top projector entries trades this self-consistency
    // for pointwise accuracy, so the identity is recorded here
    for (int j = 0; j < n_; ++j) {
        raw_s11_ += sd_.v11[j];
        raw_s12_ += sd_.v12[j];
        raw_s22_ += sd_.v22[j];
    }

    // cancellation-free corner quantities at s = 0 from the LU of -T;
    // extended precision: transient growth in the recurrence costs ~8 digits
    {
        const long double rl = r_, Nl = N;
        long double lnu = 0.0L, u = rl + 1.0L / Nl, lnc = 0.0L;
        for (int i = 2; i <= n_; ++i) {
            lnu += std::log(u);
            const long double c2 = rl * i / Nl;
            lnc += 0.5L * std::log(c2);
            u = (rl + (long double)i / Nl) - c2 / u;
        }
        lnu += std::log(u);
        g22_0_ = double(1.0L / u);
        ln_g12_0_ = double(lnc - lnu);
        f0_ = std::exp(std::log(mu1_) + ln_g12_0_ - std::log(r_) - 0.5 * sd_.ln_lambda);
    }

    diag_.resize(n_);
    offd_.resize(n_ - 1);
    for (int k = 1; k <= n_; ++k) diag_[k - 1] = r_ + p_.mu(k);
    for (int k = 2; k <= n_; ++k) offd_[k - 2] = std::sqrt(r_ * p_.mu(k));
    x0_ = solve(0.0, n_ - 1);

    // QL gives absolute accuracy ~eps*||T||; refine near-zero eigenvalues by
    // Sturm bisection in log(-s) so tiny ones carry full relative precision
    for (int k = n_ - 1; k >= 0; --k) {
        if (!(sd_.xi[k] > -1e-3)) break;
        const int want = n_ - 1 - k;  // eigenvalues strictly greater than xi[k]
        double lo = std::log(std::max(-sd_.xi[k] * 0.5, 1e-300));
        double hi = std::log(-sd_.xi[k] * 2.0);
        if (count_gt(-std::exp(lo)) != want || count_gt(-std::exp(hi)) != want + 1)
            continue;
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_gt(-std::exp(mid)) > want) hi = mid;
            else lo = mid;
        }
        sd_.xi[k] = -std::exp(0.5 * (lo + hi));
    }
    if (sd_.xi[n_ - 1] > -1e-3) refine_top();
}

std::vector<long double> SpectralEngine::solve(double s, int b_idx) const {
    // Thomas solve (sI - T) y = e_b in extended precision
    std::vector<long double> d(n_), rhs(n_, 0.0L), y(n_);
    for (int i = 0; i < n_; ++i) d[i] = (long double)s + (long double)diag_[i];
    rhs[b_idx] = 1.0L;
    for (int i = 1; i < n_; ++i) {
        const long double c = offd_[i - 1];
        const long double w = -c / d[i - 1];
        d[i] += w * c;
        rhs[i] -= w * rhs[i - 1];
    }
    y[n_ - 1] = rhs[n_ - 1] / d[n_ - 1];
    for (int i = n_ - 2; i >= 0; --i)
        y[i] = (rhs[i] + (long double)offd_[i] * y[i + 1]) / d[i];
    return y;
}

double SpectralEngine::un(double s) const {
    long double u = (long double)s + (long double)diag_[0];
    for (int i = 1; i < n_; ++i) {
        const long double c = offd_[i - 1];
        u = (long double)s + (long double)diag_[i] - c * c / u;
    }
    return double(u);
}

int SpectralEngine::count_gt(double s) const {
    // negative LU pivots of (sI - T) count eigenvalues above s
    const long double sl = s;
    long double u = sl + (long double)diag_[0];
    int c = (u < 0.0L) ? 1 : 0;
    for (int i = 1; i < n_; ++i) {
        if (u == 0.0L) u = 1e-300L;
        const long double co = offd_[i - 1];
        u = sl + (long double)diag_[i] - co * co / u;
        if (u < 0.0L) ++c;
    }
    return c;
}

SpectralEngine::UnDD SpectralEngine::un_dd(DD s) const {
    // double-double pivot recurrence: transient error growth makes even long
    // double too coarse to localize the top eigenvalue when |xi_max| is tiny
    const int N = p_.n_servers;
    UnDD out;
    DD u = dd_add(s, dd_add(DD(r_), dd_div(DD(1.0), DD(double(N)))));
    double up = 1.0, lnu_lead = 0.0;
    for (int i = 1; i < n_; ++i) {
        const double uf = u.value();
        if (uf <= 0.0) {
            // s is left of a minor eigenvalue (near-coincident pair)
            out.u = u;
            out.up = up;
            out.lnu_lead = lnu_lead;
            out.valid = false;
            return out;
        }
        lnu_lead += std::log(uf);
        const DD c2 = dd_div(dd_mul(DD(r_), DD(double(i + 1))), DD(double(N)));
        const DD g = dd_div(c2, u);
        up = 1.0 + (g.value() / uf) * up;
        const DD di = dd_add(DD(r_), dd_div(DD(double(i + 1)), DD(double(N))));
        u = dd_add(dd_add(s, di), dd_neg(g));
    }
    out.u = u;
    out.up = up;
    out.lnu_lead = lnu_lead;
    out.valid = true;
    return out;
}

void SpectralEngine::refine_top() {
    // top eigenvalue as root of the last LU pivot; projector entries from the
    // residues of G22 = 1/u_n and G12 = prod(c)/prod(u_i)
    DD s(sd_.xi[n_ - 1]);
    bool ok = false;
    for (int it = 0; it < 80; ++it) {
        const UnDD cur = un_dd(s);
        if (!cur.valid) break;
        double step = cur.u.value() / cur.up;
        DD s_new;
        bool damped = false;
        for (int h = 0; h < 60; ++h) {
            s_new = dd_add(s, DD(-step));
            if (s_new.hi < 0.0 && un_dd(s_new).valid) {
                damped = true;
                break;
            }
            step *= 0.5;
        }
        if (!damped) break;
        // the double-double pivot noise floor sits near 1e-23 relative, so a
        // tighter test would reject a fully converged iteration
        const bool conv = std::fabs(step) <= std::fabs(s.hi) * 1e-20;
        s = s_new;
        if (conv) {
            ok = true;
            break;
        }
    }
    if (!ok) return;  // degenerate near-coincident pair: keep QL data (v22 ~ 0)
    const UnDD fin = un_dd(s);
    sd_.xi[n_ - 1] = s.value();
    const double v22 = 1.0 / fin.up;
    long double lnc_sum = 0.0L;
    for (double c : offd_) lnc_sum += std::log((long double)c);
    const double v12 = std::exp(double(lnc_sum) - fin.lnu_lead) * v22;
    sd_.v22[n_ - 1] = v22;
    sd_.v12[n_ - 1] = v12;
    sd_.v11[n_ - 1] = v12 * v12 / v22;
}

double SpectralEngine::psi_plus(double s) const {
    const double b = r_ + 1.0 + s;
    return (b + std::sqrt(std::max(b * b - 4.0 * r_, 0.0))) / (2.0 * r_);
}

double SpectralEngine::g11(double s) const {
    double acc = 0.0;
    for (int k = 0; k < n_; ++k) acc += sd_.v11[k] / (s - sd_.xi[k]);
    return acc;
}

double SpectralEngine::g12(double s) const {
    double acc = 0.0;
    for (int k = 0; k < n_; ++k) acc += sd_.v12[k] / (s - sd_.xi[k]);
    return acc;
}

double SpectralEngine::g22(double s) const {
    double acc = 0.0;
    for (int k = 0; k < n_; ++k) acc += sd_.v22[k] / (s - sd_.xi[k]);
    return acc;
}

double SpectralEngine::f_stable(double s) const {
    // psi_plus(s) - G22(s), stable near s = 0
    if (std::fabs(s) < 0.6 * std::fabs(sd_.xi[n_ - 1])) {
        const double b0 = r_ + 1.0, sq0 = std::sqrt(b0 * b0 - 4.0 * r_);
        const double b = r_ + 1.0 + s;
        const double sq = std::sqrt(std::max(b * b - 4.0 * r_, 0.0));
        const double dpsi = (s + (s * (2.0 * (r_ + 1.0) + s)) / (sq + sq0)) / (2.0 * r_);
        const auto y = solve(s, n_ - 1);
        long double dot = 0.0L;
        for (int i = 0; i < n_; ++i) dot += y[i] * x0_[i];
        return f0_ + dpsi + s * double(dot);
    }
    return psi_plus(s) - g22(s);
}

double SpectralEngine::f_defl(int k, double d) const {
    // deflated at asymptote k: s = xi[k] + d
    const double s = sd_.xi[k] + d;
    double rest = 0.0;
    for (int j = 0; j < n_; ++j)
        if (j != k) rest += sd_.v22[j] / (s - sd_.xi[j]);
    return psi_plus(s) - sd_.v22[k] / d - rest;
}

double SpectralEngine::qreg(int k) const {
    // regular part of psi_plus - G22 at xi[k] (its own v22 term removed)
    double rest = 0.0;
    for (int j = 0; j < n_; ++j)
        if (j != k) rest += sd_.v22[j] / (sd_.xi[k] - sd_.xi[j]);
    return psi_plus(sd_.xi[k]) - rest;
}

double SpectralEngine::mgf(double s) const {
    if (s <= sd_.xi[n_ - 1] && s < 0.0)
        throw std::domain_error("mgf: s must lie right of the rightmost singularity");
    const double f = f_stable(s);
    // G12(s) = G12(0) - s e_1^T G(s) G(0) e_n, cancellation-free
    const auto y1 = solve(s, 0);
    long double dot = 0.0L;
    for (int i = 0; i < n_; ++i) dot += y1[i] * x0_[i];
    const double G12 = std::exp(ln_g12_0_) - s * double(dot);
    if (std::fabs(f) < 1e-300) throw NumericError("mgf: vanishing pole denominator");
    return mu1_ * (g11(s) + G12 * G12 / f);
}

int SpectralEngine::count_poles() const {
    double fxm = g22(-xm_) - psi_plus(-xm_);
    int c = 0;
    for (double x : sd_.xi)
        if (-x < xm_) ++c;
    return c + (fxm >= -1e-12 ? 1 : 0);
}

PoleSet SpectralEngine::find_poles() const {
    std::vector<double> poles;
    std::vector<int> assoc;
    std::vector<int> inrange;
    for (int k = 0; k < n_; ++k)
        if (sd_.xi[k] > -xm_) inrange.push_back(k);
    const double fedge = psi_plus(-xm_) - g22(-xm_);

    auto bisect_logdL = [&](int k, double dlo, double dhi) {
        // root in delta = s - xi[k] on (dlo, dhi); f < 0 near the asymptote
        double lo = std::log(dlo), hi = std::log(dhi);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f_defl(k, std::exp(mid)) > 0.0) hi = mid;
            else lo = mid;
        }
        return sd_.xi[k] + std::exp(0.5 * (lo + hi));
    };
    auto bisect_logdR = [&](int k, double dlo, double dhi) {
        // root in |delta| left of asymptote k; f > 0 as delta -> 0-
        double lo = std::log(dlo), hi = std::log(dhi);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f_defl(k, -std::exp(mid)) < 0.0) hi = mid;
            else lo = mid;
        }
        return sd_.xi[k] - std::exp(0.5 * (lo + hi));
    };
    auto bisect_logz = [&](double zlo_mag, double zhi_mag) {
        // root in -|s|; f_stable(0) > 0 and f < 0 at -zhi_mag
        double lo = std::log(zlo_mag), hi = std::log(zhi_mag);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f_stable(-std::exp(mid)) < 0.0) hi = mid;
            else lo = mid;
        }
        return -std::exp(0.5 * (lo + hi));
    };

    if (std::fabs(fedge) < 1e-12) {
        poles.push_back(-xm_);
        assoc.push_back(kAssocEdge);
    }
    if (inrange.empty()) {
        if (fedge < -1e-12) {
            // single smooth root: f increases from fedge < 0 to f0 > 0
            double lo = -xm_, hi = 0.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = std::fabs(mid) < 0.5 * xm_ ? f_stable(mid)
                                                            : psi_plus(mid) - g22(mid);
                if (fm > 0.0) hi = mid;
                else lo = mid;
            }
            poles.push_back(0.5 * (lo + hi));
            assoc.push_back(kAssocLU);
        }
        return pole_weights(poles, assoc);
    }

    // first interval (-xm, xi[a])
    const int a = inrange.front();
    if (fedge < -1e-12) {
        const double Wf = sd_.xi[a] + xm_;
        if (f_defl(a, -0.5 * Wf) > 0.0) {
            double lo = -xm_, hi = sd_.xi[a] - 0.5 * Wf;
            for (int it = 0; it < 200; ++it) {
                const double m2 = 0.5 * (lo + hi);
                if (psi_plus(m2) - g22(m2) > 0.0) hi = m2;
                else lo = m2;
            }
            poles.push_back(0.5 * (lo + hi));
        } else {
            poles.push_back(bisect_logdR(a, 1e-300, 0.5 * Wf));
        }
        assoc.push_back(a);
    }

    // interior intervals
    for (std::size_t j = 0; j + 1 < inrange.size(); ++j) {
        const int k = inrange[j], k2 = inrange[j + 1];
        const double W = sd_.xi[k2] - sd_.xi[k];
        if (sd_.v22[k] < 1e-250) {
            const double q = qreg(k);
            if (q > 0.0) {
                poles.push_back(sd_.xi[k] + sd_.v22[k] / q);
                assoc.push_back(-1 - k);
                continue;
            }
            // root not hugging the left asymptote; f_defl handles v22 ~ 0
        }
        if (f_defl(k, 0.5 * W) > 0.0) {
            poles.push_back(bisect_logdL(k, 1e-300, 0.5 * W));
            assoc.push_back(k);
        } else {
            if (sd_.v22[k2] < 1e-250) {
                const double q = qreg(k2);
                if (q < 0.0) {
                    poles.push_back(sd_.xi[k2] + sd_.v22[k2] / q);
                    assoc.push_back(-1 - k2);
                }
                continue;  // else no root resolvable adjacent to k2 from the left
            }
            poles.push_back(bisect_logdR(k2, 1e-300, 0.5 * W));
            assoc.push_back(k2);
        }
    }

    // last interval (xi[b], 0): exactly one root since f(0) = f0 > 0
    const int b = inrange.back();
    const double W = -sd_.xi[b];
    {
        // hugging root: when the offset d = z - xi[b] is tiny compared with
        // the interval, solve the deflated fixed point d = v22 / (psi_plus -
        // R22) so d carries the relative precision of v22 rather than the
        // absolute precision of a sign bisection, and take the residue from
        // the deflated sums directly
        auto rest22 = [&](double s) {
            double a = 0.0;
            for (int j = 0; j < n_; ++j)
                if (j != b) a += sd_.v22[j] / (s - sd_.xi[j]);
            return a;
        };
        const double den0 = psi_plus(sd_.xi[b]) - rest22(sd_.xi[b]);
        if (sd_.v22[b] >= 1e-250 && den0 > 0.0 && sd_.v22[b] / den0 < 0.1 * W) {
            double d = sd_.v22[b] / den0;
            for (int it = 0; it < 100; ++it) {
                const double s = sd_.xi[b] + d;
                const double dn = sd_.v22[b] / (psi_plus(s) - rest22(s));
                const bool conv = std::fabs(dn - d) <= 1e-15 * dn;
                d = dn;
                if (conv) break;
            }
            const double z = sd_.xi[b] + d;
            double r12 = 0.0, p22 = 0.0;
            for (int j = 0; j < n_; ++j) {
                if (j == b) continue;
                const double dj = z - sd_.xi[j];
                r12 += sd_.v12[j] / dj;
                p22 += sd_.v22[j] / (dj * dj);
            }
            const double bb = r_ + 1.0 + z;
            const double sq = std::sqrt(std::max(bb * bb - 4.0 * r_, 0.0));
            const double q12 = sd_.v12[b] / d + r12;
            const double dden = psi_plus(z) / sq + sd_.v22[b] / (d * d) + p22;
            poles.push_back(z);
            assoc.push_back(kAssocEdge);  // weight supplied below, not recomputed
            auto out = pole_weights(poles, assoc);
            for (std::size_t i = 0; i < out.zeta.size(); ++i)
                if (out.zeta[i] == z)
                    out.weight[i] = mu1_ * q12 * q12 / (dden * std::fabs(z));
            return out;
        }
    }
    if (sd_.v22[b] < 1e-250) {
        const double q = qreg(b);
        if (q > 0.0) {
            poles.push_back(sd_.xi[b] + sd_.v22[b] / q);
            assoc.push_back(-1 - b);
        } else {
            poles.push_back(bisect_logz(1e-300, 0.5 * W));
            assoc.push_back(kAssocLU);
        }
    } else if (f_stable(-0.5 * W) > 0.0) {
        poles.push_back(bisect_logdL(b, 1e-300, 0.5 * W));
        assoc.push_back(b);
    } else {
        poles.push_back(bisect_logz(1e-300, 0.5 * W));
        assoc.push_back(kAssocLU);
    }
    return pole_weights(poles, assoc);
}

PoleSet SpectralEngine::pole_weights(const std::vector<double>& poles,
                                     const std::vector<int>& assoc) const {
    std::vector<double> ws(poles.size(), 0.0);
    for (std::size_t i = 0; i < poles.size(); ++i) {
        const double z = poles[i];
        const int k = assoc[i];
        const double b = r_ + 1.0 + z;
        const double sq = std::sqrt(std::max(b * b - 4.0 * r_, 0.0));
        if (k == kAssocEdge) {
            ws[i] = 0.0;
            continue;
        }
        if (k == kAssocLU) {
            const auto y1 = solve(z, 0);
            long double dot = 0.0L;
            for (int q = 0; q < n_; ++q) dot += y1[q] * x0_[q];
            const double G12 = std::exp(ln_g12_0_) - z * double(dot);
            const auto yn = solve(z, n_ - 1);
            const double G22v = 1.0 / un(z);
            long double p2 = 0.0L;
            for (int q = 0; q < n_; ++q) p2 += yn[q] * yn[q];
            const double J = G12 * G12 * sq / (G22v + double(p2) * sq);
            ws[i] = -mu1_ * J / z;
            continue;
        }
        if (k < 0) {
            const int kk = -1 - k;
            ws[i] = mu1_ * sd_.v11[kk] / std::fabs(z);
            continue;
        }
        const double d = z - sd_.xi[k];
        double R12 = 0.0, R22 = 0.0, P22 = 0.0;
        for (int j = 0; j < n_; ++j) {
            if (j == k) continue;
            const double den = z - sd_.xi[j];
            R12 += sd_.v12[j] / den;
            R22 += sd_.v22[j] / den;
            P22 += sd_.v22[j] / (den * den);
        }
        const double num = (sd_.v12[k] + d * R12) * (sd_.v12[k] + d * R12) * sq;
        const double den = d * (sd_.v22[k] + d * R22) + (sd_.v22[k] + d * d * P22) * sq;
        ws[i] = -mu1_ * (num / den) / z;
    }
    std::vector<std::size_t> order(poles.size());
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return poles[x] > poles[y]; });
    PoleSet out;
    for (auto idx : order) {
        out.zeta.push_back(poles[idx]);
        out.weight.push_back(ws[idx]);
    }
    return out;
}

double SpectralEngine::rcut(double s) const {
    const double b = r_ + 1.0 + s;
    int k0 = 0;
    for (int k = 1; k < n_; ++k)
        if (std::fabs(s - sd_.xi[k]) < std::fabs(s - sd_.xi[k0])) k0 = k;
    const double ds = s - sd_.xi[k0];
    double s12 = 0.0, s22 = 0.0;
    for (int j = 0; j < n_; ++j) {
        if (j == k0) continue;
        s12 += sd_.v12[j] / (s - sd_.xi[j]);
        s22 += sd_.v22[j] / (s - sd_.xi[j]);
    }
    const double num = sd_.v12[k0] + ds * s12;
    const double g22v = sd_.v22[k0] + ds * s22;
    return num * num / (ds * ds - b * ds * g22v + r_ * g22v * g22v);
}

std::vector<std::pair<double, double>> SpectralEngine::cut_nodes(int L) const {
    if (L < 8) throw std::domain_error("cut_nodes: L must be >= 8");
    const double sr = std::sqrt(r_);
    const double al = (sr + 1.0 / sr) / 2.0;
    std::vector<std::pair<double, double>> out(L);
    for (int i = 1; i <= L; ++i) {
        const double tau = (i - 0.5) / L;
        const double x = 1.0 + r_ + 2.0 * sr * std::cos(M_PI * tau);
        const double R = rcut(-x);
        const double sh = std::sin(M_PI * tau / 2.0), ch = std::cos(M_PI * tau / 2.0);
        const double w = (2.0 * mu1_ * sr / L) * R * sh * sh /
                         (1.0 + (al - 1.0) / (2.0 * ch * ch));
        out[i - 1] = {x, w};
    }
    return out;
}

std::vector<std::pair<double, double>> SpectralEngine::cut_adaptive(int L0, double tol,
                                                                   int* L_used) const {
    int L = L0;
    auto nodes = cut_nodes(L);
    auto total = [](const std::vector<std::pair<double, double>>& v) {
        double s = 0.0, m = 0.0;
        for (auto& [x, w] : v) {
            s += w;
            m += w / x;
        }
        return std::pair<double, double>{s, m};
    };
    auto [s0, m0] = total(nodes);
    for (int it = 0; it < 6; ++it) {
        L *= 3;
        nodes = cut_nodes(L);
        auto [s1, m1] = total(nodes);
        if (std::fabs(s1 - s0) < tol &&
            std::fabs(m1 - m0) < tol * std::max(1.0, std::fabs(m1)))
            break;
        s0 = s1;
        m0 = m1;
    }
    if (L_used) *L_used = L;
    return nodes;
}

NearUnityGuard SpectralEngine::near_unity_pole_guard() const {
    NearUnityGuard g;
    const double gap = 1.0 / r_ - g22(0.0);
    g.active = std::fabs(gap) < 1e-9;
    // linearized near-zero pole of the MGF denominator
    double g22p = 0.0;
    for (int k = 0; k < n_; ++k) g22p -= sd_.v22[k] / (sd_.xi[k] * sd_.xi[k]);
    const double denom = 1.0 / (1.0 - r_) - r_ * g22p;
    g.zeta1 = -(mu1_ / std::exp(0.5 * sd_.ln_lambda)) * g12_zero() / denom;
    return g;
}

bool SpectralEngine::small_r_criterion() const {
    double m = 0.0;
    for (double v : sd_.v12) m = std::max(m, std::fabs(v));
    return m < 1e-4;
}

ExponentialMixture small_r_mixture(const SpectralEngine& e) {
    if (!e.small_r_criterion())
        throw NumericError("small_r_mixture: max |v12| >= 1e-4; use the general path");
    ExponentialMixture m;
    const auto& sd = e.data();
    const double mu1 = e.params().mu1();
    for (std::size_t k = 0; k < sd.xi.size(); ++k)
        m.nodes.push_back({-1.0 / sd.xi[k], mu1 * sd.v11[k] / std::fabs(sd.xi[k]),
                           NodeOrigin::pole});
    return m;
}

namespace {

// cut nodes for N = 1, where R_cut is the constant 1/r
std::vector<std::pair<double, double>> cut_nodes_n1(double r, int L) {
    const double sr = std::sqrt(r);
    const double al = (sr + 1.0 / sr) / 2.0;
    std::vector<std::pair<double, double>> out(L);
    for (int i = 1; i <= L; ++i) {
        const double tau = (i - 0.5) / L;
        const double x = 1.0 + r + 2.0 * sr * std::cos(M_PI * tau);
        const double sh = std::sin(M_PI * tau / 2.0), ch = std::cos(M_PI * tau / 2.0);
        const double w = (2.0 * sr / (r * L)) * sh * sh /
                         (1.0 + (al - 1.0) / (2.0 * ch * ch));
        out[i - 1] = {x, w};
    }
    return out;
}

std::vector<std::pair<double, double>> cut_adaptive_n1(double r, int L0, double tol) {
    int L = L0;
    auto nodes = cut_nodes_n1(r, L);
    auto total = [](const std::vector<std::pair<double, double>>& v) {
        double s = 0.0, m = 0.0;
        for (auto& [x, w] : v) {
            s += w;
            m += w / x;
        }
        return std::pair<double, double>{s, m};
    };
    auto [s0, m0] = total(nodes);
    for (int it = 0; it < 6; ++it) {
        L *= 3;
        nodes = cut_nodes_n1(r, L);
        auto [s1, m1] = total(nodes);
        if (std::fabs(s1 - s0) < tol &&
            std::fabs(m1 - m0) < tol * std::max(1.0, std::fabs(m1)))
            break;
        s0 = s1;
        m0 = m1;
    }
    return nodes;
}

}  // namespace

BusyPeriodDistribution bp_distribution(const ModelParams& p, int L0) {
    p.validate();
    if (p.r > 1.0) throw std::domain_error("bp_distribution requires r <= 1");
    BusyPeriodDistribution d;
    d.params = p;

    if (p.r == 0.0) {
        // pure-death boundary: one departure at rate mu_1 ends the period
        d.mixture.nodes.push_back({double(p.n_servers), 1.0, NodeOrigin::pole});
        d.tail_rate = p.mu1();
        return d;
    }
    if (p.n_servers == 1) {
        for (auto& [x, w] : cut_adaptive_n1(p.r, L0, 1e-11))
            d.mixture.nodes.push_back({1.0 / x, w, NodeOrigin::cut});
        d.tail_rate = (1.0 - std::sqrt(p.r)) * (1.0 - std::sqrt(p.r));
        d.mixture.validate();
        return d;
    }

    SpectralEngine eng(p);
    if (eng.small_r_criterion()) {
        d.mixture = small_r_mixture(eng);
        d.tail_rate = std::fabs(eng.data().xi.back());
        d.mixture.validate();
        return d;
    }
    d.pole_part = eng.find_poles();
    for (std::size_t i = 0; i < d.pole_part.zeta.size(); ++i)
        if (d.pole_part.weight[i] != 0.0)
            d.mixture.nodes.push_back({-1.0 / d.pole_part.zeta[i], d.pole_part.weight[i],
                                       NodeOrigin::pole});
    for (auto& [x, w] : eng.cut_adaptive(L0, 1e-11))
        d.mixture.nodes.push_back({1.0 / x, w, NodeOrigin::cut});
    d.tail_rate = d.pole_part.zeta.empty() ? eng.cut_edge() : -d.pole_part.zeta.front();
    d.mixture.validate();
    return d;
}

double r1_sf(const ModelParams& p, double t) {
    if (p.r != 1.0) throw std::domain_error("r1_sf requires r = 1");
    if (t < 0.0) throw std::domain_error("r1_sf requires t >= 0");
    // cut-only survival at the ergodic boundary:
    //   F(t) = (4 mu1 / pi) * int_0^{pi/2} e^{-4 t sin^2 h} R_cut(-4 sin^2 h) cos^2 h dh
    // (substitution u = sin^2 h in the cut integral over [0, 4]; the
    // trigonometric variable removes the square-root endpoint singularity)
    std::unique_ptr<SpectralEngine> eng;
    if (p.n_servers >= 2) eng = std::make_unique<SpectralEngine>(p);
    auto integrand = [&](double h) {
        const double sn = std::sin(h), cn = std::cos(h);
        const double R = eng ? eng->rcut(-4.0 * sn * sn) : 1.0;
        return std::exp(-4.0 * t * sn * sn) * R * cn * cn;
    };
    // 20-point Gauss-Legendre rule on [-1, 1] via the Jacobi matrix
    static const auto rule = [] {
        constexpr int n = 20;
        std::vector<double> d(n, 0.0), e(n - 1);
        for (int k = 1; k < n; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
        auto eig = eig_tridiag(d, e);
        std::array<std::pair<double, double>, 20> out;
        for (int j = 0; j < n; ++j) {
            const double v0 = eig.vec(0, j);
            out[j] = {eig.values[j], 2.0 * v0 * v0};
        }
        return out;
    }();
    // geometric panels resolve both the e^{-4t sin^2 h} scale and the sharp
    // peak of R_cut at the origin, whose width is ~1/sqrt(m) with
    // sqrt(m) = Lambda/mu_1 (the pole that merges with the cut edge at r = 1)
    const double end = 0.5 * M_PI;
    const double sqrt_m =
        eng ? std::exp(eng->data().ln_lambda) / p.mu1() : 1.0;
    double width = std::min({end, 0.25 / std::sqrt(4.0 * t + 1.0), 0.25 / sqrt_m});
    double a = 0.0, total = 0.0;
    while (a < end) {
        const double b = std::min(end, a + width);
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double panel = 0.0;
        for (auto& [y, w] : rule) panel += w * integrand(c + h * y);
        total += h * panel;
        a = b;
        width *= 2.0;
    }
    return 4.0 * p.mu1() / M_PI * total;
}

double cut_tail_asymptote(const ModelParams& p, double t) {
    if (!(p.r > 0.0 && p.r < 1.0))
        throw std::domain_error("cut_tail_asymptote requires 0 < r < 1");
    const double sr = std::sqrt(p.r);
    const double a = (sr + 1.0 / sr) / 4.0 - 0.5;
    const double rate = 4.0 * a * sr;  // equals the cut edge (1 - sqrt r)^2
    double R;
    if (p.n_servers == 1) {
        R = 1.0 / p.r;
    } else {
        SpectralEngine eng(p);
        R = eng.rcut(-rate);
    }
    return p.mu1() / (8.0 * std::sqrt(M_PI) * a * std::pow(p.r, 0.25)) * R *
           std::pow(t, -1.5) * std::exp(-rate * t);
}

std::string diagnostics_json(const ModelParams& p) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["n_servers"] = p.n_servers;
    j["r"] = p.r;
    auto check = [&](const char* name, double residual, double tol) {
        j["checks"][name] = {{"pass", std::fabs(residual) <= tol}, {"residual", residual},
                             {"tolerance", tol}};
        return std::fabs(residual) <= tol;
    };
    if (p.n_servers >= 2 && p.r > 0.0) {
        SpectralEngine eng(p);
        const auto& sd = eng.data();
        double s11 = 0.0, s12 = 0.0, s22 = 0.0, trace = 0.0;
        eng.completeness_sums(s11, s12, s22);
        for (std::size_t k = 0; k < sd.xi.size(); ++k) trace += sd.xi[k];
        const int N = p.n_servers;
        check("completeness_v11", s11 - 1.0, 1e-10);
        // for a 1x1 system the first and last eigenvector components coincide,
        // so the cross completeness sum is 1 rather than 0
        check("completeness_v12", s12 - (N == 2 ? 1.0 : 0.0), 1e-10);
        check("completeness_v22", s22 - 1.0, 1e-10);
        check("trace_identity", trace + (N - 1) * (p.r + 0.5), 1e-9 * N);
        check("corner_identity",
              p.mu1() * eng.g12_zero() / std::exp(0.5 * sd.ln_lambda) +
                  p.r * eng.g22_zero() - 1.0,
              1e-8);
        const auto ps = eng.find_poles();
        j["pole_count"] = ps.zeta.size();
        j["pole_locations"] = ps.zeta;
        j["pole_count_formula"] = eng.count_poles();
        j["checks"]["pole_count_match"] = {
            {"pass", int(ps.zeta.size()) == eng.count_poles()},
            {"residual", int(ps.zeta.size()) - eng.count_poles()},
            {"tolerance", 0}};
        j["eigenvalues"] = sd.xi;
    }
    if (p.r > 0.0 && p.r <= 1.0) {
        auto d = bp_distribution(p);
        check("weight_sum", d.mixture.total_weight() - 1.0, 1e-8);
        if (p.r < 1.0)
            check("mean_identity", d.mixture.mean() / exact_mean(p) - 1.0, 1e-6);
        j["mixture_size"] = d.mixture.nodes.size();
    }
    bool all = true;
    for (auto& item : j["checks"].items()) all = all && item.value()["pass"].get<bool>();
    j["all_pass"] = all;
    return j.dump(2);
}

}  // namespace busyper
