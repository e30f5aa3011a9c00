#include "busyper/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "busyper/eigensolver.hpp"
#include "busyper/model.hpp"

namespace busyper::specfun {

namespace {

// Miller backward recurrence, generic over double / complex<double>.
// Starts far enough above both the requested order and the turning point
// |w| that the minimal solution dominates by many orders at index nmax.
template <class T>
std::vector<T> miller_scaled_seq(T w, int nmax, double mag) {
    std::vector<T> out(std::size_t(nmax) + 1, T(0));
    if (mag == 0.0) {
        out[0] = T(1);
        return out;
    }
    const int base = std::max(nmax, int(std::ceil(mag)));
    const int start = base + 40 + int(12.0 * std::sqrt(double(base) + 1.0));

    T pkp1 = T(0);            // I_{k+1} surrogate
    T pk = T(1e-290);         // I_k surrogate at k = start
    T sum = T(0);             // accumulates p_0 + 2*sum_{k>=1} p_k
    for (int k = start; k >= 1; --k) {
        T pkm1 = pkp1 + (2.0 * k / w) * pk;
        if (k - 1 <= nmax) out[k - 1] = pkm1;
        sum += 2.0 * pk;
        pkp1 = pk;
        pk = pkm1;
        if (std::abs(pk) > 1e270) {  // rescale to dodge overflow
            const T inv = T(1) / pk;
            pkp1 *= inv;
            sum *= inv;
            pk = T(1);
            for (auto& v : out) v *= inv;
        }
    }
    sum += pk;  // the k=0 term enters once
    // sum equals C * e^{w}; dividing gives the e^{-w}-scaled values
    for (auto& v : out) v /= sum;
    return out;
}

double sinpi(double x) {
    double n = std::nearbyint(x);
    double s = std::sin(M_PI * (x - n));
    return (std::fmod(std::fabs(n), 2.0) == 1.0) ? -s : s;
}

// 1/Gamma(x), entire; zero at non-positive integers
double rgamma(double x) {
    if (x > 0.5) {
        if (x > 171.62) return 0.0;  // 1/Gamma underflows
        return 1.0 / std::tgamma(x);
    }
    return sinpi(x) / M_PI * std::exp(std::lgamma(1.0 - x));
}

// regularized Q(n,x) = Gamma(n,x)/Gamma(n) via series / continued fraction
double reg_gamma_q(double n, double x) {
    if (x == 0.0) return 1.0;
    if (x < n + 1.0) {  // series for P, then complement
        double ap = n, del = 1.0 / n, sum = del;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-17) break;
        }
        return 1.0 - sum * std::exp(-x + n * std::log(x) - std::lgamma(n));
    }
    // Lentz continued fraction for Q
    const double tiny = 1e-300;
    double b = x + 1.0 - n, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        double an = -double(i) * (double(i) - n);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x + n * std::log(x) - std::lgamma(n)) * h;
}

}  // namespace

std::vector<double> bessel_i_scaled_seq(double x, int nmax) {
    if (x < 0.0) throw std::domain_error("bessel_i_scaled: x must be >= 0");
    if (nmax < 0) throw std::domain_error("bessel_i_scaled: order must be >= 0");
    return miller_scaled_seq<double>(x, nmax, x);
}

std::vector<cd> bessel_i_scaled_seq(cd w, int nmax) {
    if (nmax < 0) throw std::domain_error("bessel_i_scaled: order must be >= 0");
    return miller_scaled_seq<cd>(w, nmax, std::abs(w));
}

double bessel_i_scaled(int n, double x) {
    return bessel_i_scaled_seq(x, n)[n];
}

cd marcum_qbar(cd a, cd b) {
    if (std::abs(b) == 0.0) return cd(0.0);
    if (std::abs(a) == 0.0) return 1.0 - std::exp(-b * b * 0.5);
    const cd w = a * b;
    const cd amb = a - b;
    const cd envelope = std::exp(-amb * amb * 0.5);  // e^{ab - (a^2+b^2)/2}
    const bool primal = std::abs(b) < std::abs(a);   // |b/a| < 1
    const cd ratio = primal ? b / a : a / b;

    int nmax = 64;
    while (true) {
        auto ik = bessel_i_scaled_seq(w, nmax);
        cd sum = primal ? cd(0.0) : ik[0];
        cd rp = ratio;
        double scale = std::abs(sum);
        bool converged = false;
        for (int k = 1; k <= nmax; ++k) {
            cd term = rp * ik[k];
            sum += term;
            scale = std::max(scale, std::abs(sum));
            if (std::abs(term) < 1e-16 * std::max(scale, 1e-300)) {
                converged = true;
                break;
            }
            rp *= ratio;
        }
        if (converged)
            return primal ? envelope * sum : 1.0 - envelope * sum;
        if (nmax >= 1000000)
            throw NumericError("marcum_qbar: Neumann series did not converge within term budget");
        nmax *= 4;
    }
}

double kummer_m_reg(double a, double b, double z) {
    if (z < 0.0) return std::exp(z) * kummer_m_reg(b - a, b, -z);
    double c = 1.0;           // (a)_k z^k / k!
    double sum = rgamma(b);   // k = 0 term
    double scale = std::fabs(sum);
    int quiet = 0;
    for (int k = 0; k < 100000; ++k) {
        c *= (a + k) * z / (k + 1.0);
        if (c == 0.0) break;  // a is a non-positive integer: series terminates
        const double rg = rgamma(b + k + 1.0);
        // an exact zero at a pole of 1/Gamma is regularization, not convergence
        if (rg == 0.0 && b + k + 1.0 <= 0.5) continue;
        double term = c * rg;
        sum += term;
        scale = std::max(scale, std::fabs(sum));
        if (std::fabs(term) <= 1e-17 * std::max(scale, 1e-300)) {
            if (++quiet >= 3 && k > z) break;
        } else {
            quiet = 0;
        }
    }
    return sum;
}

double upper_gamma(double n, double x) {
    if (!(n > 0.0)) throw std::domain_error("upper_gamma: n must be > 0");
    if (x < 0.0) throw std::domain_error("upper_gamma: x must be >= 0");
    return reg_gamma_q(n, x) * std::exp(std::lgamma(n));
}

double erfcx(double x) {
    if (x < 0.0) throw std::domain_error("erfcx: x must be >= 0");
    if (x <= 2.5) return std::exp(x * x) * std::erfc(x);
    // Laplace continued fraction, rapid for large x
    const double tiny = 1e-300;
    double c = 1.0 / tiny, d = 1.0 / x, h = d, b = x;
    for (int i = 1; i < 200; ++i) {
        double an = 0.5 * i;
        d = b + an * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return h / std::sqrt(M_PI);
}

std::vector<std::pair<double, double>> gauss_laguerre(int L) {
    if (L < 1) throw std::domain_error("gauss_laguerre: L must be >= 1");
    // Golub-Welsch on the Laguerre Jacobi matrix: diag 2k+1, offdiag k
    std::vector<double> d(L), e(L - 1);
    for (int k = 0; k < L; ++k) d[k] = 2.0 * k + 1.0;
    for (int k = 1; k < L; ++k) e[k - 1] = double(k);
    auto eig = eig_tridiag(d, e);
    std::vector<std::pair<double, double>> out(L);
    for (int j = 0; j < L; ++j) {
        double v0 = eig.vec(0, j);
        out[j] = {eig.values[j], v0 * v0};
    }
    return out;
}

}  // namespace busyper::specfun
