#pragma once

// Minimal double-double (~32 significant digits) scalar arithmetic.
// Used where transient error growth in tridiagonal eliminations exceeds
// what 80-bit long double can absorb (e.g. locating eigenvalues of
// magnitude ~1e-10 to full relative precision).

namespace busyper {

struct DD {
    double hi = 0.0, lo = 0.0;
    DD() = default;
    DD(double h) : hi(h), lo(0.0) {}
    DD(double h, double l) : hi(h), lo(l) {}
    double value() const { return hi + lo; }
};

namespace detail {
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}
inline void split(double a, double& h, double& l) {
    double t = 134217729.0 * a;  // 2^27+1
    h = t - (t - a);
    l = a - h;
}
inline void two_prod(double a, double b, double& p, double& e) {
    p = a * b;
    double ah, al, bh, bl;
    split(a, ah, al);
    split(b, bh, bl);
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
}
}  // namespace detail

inline DD dd_add(DD x, DD y) {
    double s, e;
    detail::two_sum(x.hi, y.hi, s, e);
    e += x.lo + y.lo;
    double s2, e2;
    detail::two_sum(s, e, s2, e2);
    return {s2, e2};
}

inline DD dd_neg(DD x) { return {-x.hi, -x.lo}; }

inline DD dd_sub(DD x, DD y) { return dd_add(x, dd_neg(y)); }

inline DD dd_mul(DD x, DD y) {
    double p, e;
    detail::two_prod(x.hi, y.hi, p, e);
    e += x.hi * y.lo + x.lo * y.hi;
    double s2, e2;
    detail::two_sum(p, e, s2, e2);
    return {s2, e2};
}

inline DD dd_div(DD x, DD y) {
    double q1 = x.hi / y.hi;
    DD r = dd_sub(x, dd_mul(DD(q1), y));
    double q2 = r.hi / y.hi;
    r = dd_sub(r, dd_mul(DD(q2), y));
    double q3 = r.hi / y.hi;
    double s, e;
    detail::two_sum(q1, q2, s, e);
    e += q3;
    double s2, e2;
    detail::two_sum(s, e, s2, e2);
    return {s2, e2};
}

}  // namespace busyper
