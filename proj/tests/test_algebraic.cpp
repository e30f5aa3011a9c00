#include <cmath>
#include <vector>

#include "busyper/algebraic.hpp"
#include "busyper/model.hpp"
#include "busyper/spectral.hpp"
#include "doctest.h"

using namespace busyper;

TEST_CASE("polynomial helpers") {
    Poly p{1.0, -3.0, 2.0};  // 1 - 3x + 2x^2
    CHECK(poly::eval(p, 2.0) == doctest::Approx(3.0));
    CHECK(poly::eval(Poly{}, 5.0) == doctest::Approx(0.0));

    auto s = poly::add(p, Poly{0.0, 1.0});
    CHECK(poly::eval(s, 2.0) == doctest::Approx(5.0));

    auto m = poly::mul(Poly{1.0, 1.0}, Poly{-1.0, 1.0});  // (1+x)(x-1) = x^2-1
    REQUIRE(m.size() == 3);
    CHECK(m[0] == doctest::Approx(-1.0));
    CHECK(m[1] == doctest::Approx(0.0));
    CHECK(m[2] == doctest::Approx(1.0));

    auto sc = poly::scale(p, -2.0);
    CHECK(poly::eval(sc, 1.5) == doctest::Approx(-2.0 * poly::eval(p, 1.5)));

    // q(x) = p(x + c)
    auto sh = poly::shift(p, 0.7);
    for (double x : {-1.0, 0.0, 2.3}) {
        CHECK(poly::eval(sh, x) == doctest::Approx(poly::eval(p, x + 0.7)).epsilon(1e-14));
    }

    auto d = poly::derivative(p);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(-3.0));
    CHECK(d[1] == doctest::Approx(4.0));
}

TEST_CASE("continued-fraction MGF: closed forms") {
    // normalization at s = 0
    CHECK(eta_chain_mgf(ModelParams{7, 0.6, 1.0}, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // N = 1 the chain reduces to psi_-
    for (double s : {0.1, 1.0, 10.0}) {
        CHECK(eta_chain_mgf(ModelParams{1, 0.5, 1.0}, s) ==
              doctest::Approx(psi_pm(s, 0.5).second).epsilon(1e-14));
    }
    // N = 2 closed form mu1/(mu1 - 1 + r psi_+)
    for (double s : {0.1, 1.0, 10.0}) {
        const double r = 0.5;
        const double pp = psi_pm(s, r).first;
        CHECK(eta_chain_mgf(ModelParams{2, r, 1.0}, s) ==
              doctest::Approx(0.5 / (0.5 - 1.0 + r * pp)).epsilon(1e-13));
    }
}

TEST_CASE("continued-fraction MGF agrees with the resolvent MGF") {
    for (int N : {2, 5, 11, 24, 40}) {
        for (double r : {0.2, 0.6, 0.9}) {
            ModelParams p{N, r, 1.0};
            SpectralEngine eng(p);
            for (double s : {0.1, 1.0, 10.0}) {
                const double a = eta_chain_mgf(p, s);
                const double b = eng.mgf(s);
                CHECK(std::fabs(a - b) <= 1e-10 * std::fabs(b));
            }
        }
    }
}

TEST_CASE("X-recursion start and first steps") {
    ModelParams p{4, 0.3, 1.0};
    auto X = x_recursion(p);
    REQUIRE(X.size() == 4);
    // X_0 = 0, X_1 = 1, X_2 = sigma_1
    CHECK(poly::eval(X[0], 2.0) == doctest::Approx(0.0));
    CHECK(poly::eval(X[1], 2.0) == doctest::Approx(1.0));
    REQUIRE(X[2].size() == 2);
    CHECK(X[2][0] == doctest::Approx(0.0));
    CHECK(X[2][1] == doctest::Approx(1.0));
    // X_3 = sigma^2 + (mu_2 - mu_1) sigma - r mu_2
    const double muh2 = p.mu(2) - p.mu(1), rmu2 = p.r * p.mu(2);
    REQUIRE(X[3].size() == 3);
    CHECK(X[3][0] == doctest::Approx(-rmu2).epsilon(1e-15));
    CHECK(X[3][1] == doctest::Approx(muh2).epsilon(1e-15));
    CHECK(X[3][2] == doctest::Approx(1.0));
}

TEST_CASE("D-polynomials: low-N closed forms") {
    // N = 2: D0 = 1, D1 = 0
    auto d2 = d_polynomials(ModelParams{2, 0.4, 1.0});
    CHECK(poly::eval(d2.d0, 0.37) == doctest::Approx(1.0));
    CHECK(poly::eval(d2.d1, 0.37) == doctest::Approx(0.0));

    // N = 3: D0 = sigma_1 = s + r + 1/3, D1 = -r mu_2
    const double r = 0.45;
    auto d3 = d_polynomials(ModelParams{3, r, 1.0});
    for (double s : {-0.2, 0.0, 1.1}) {
        CHECK(poly::eval(d3.d0, s) == doctest::Approx(s + r + 1.0 / 3.0).epsilon(1e-14));
        CHECK(poly::eval(d3.d1, s) == doctest::Approx(-r * 2.0 / 3.0).epsilon(1e-14));
    }

    // N = 4: D0 = sigma_1 sigma_2 - r mu_2, D1 = -r mu_3 sigma_1
    auto d4 = d_polynomials(ModelParams{4, r, 1.0});
    for (double s : {-0.2, 0.0, 1.1}) {
        const double s1 = s + r + 0.25, s2 = s + r + 0.5;
        CHECK(poly::eval(d4.d0, s) ==
              doctest::Approx(s1 * s2 - r * 0.5).epsilon(1e-14));
        CHECK(poly::eval(d4.d1, s) == doctest::Approx(-r * 0.75 * s1).epsilon(1e-14));
    }
}

TEST_CASE("conjugate-product polynomial and the cut function") {
    // N = 2: D+D- = (mu_1 - 1) sigma_1 + r, and at r = 1/2 the cut function
    // collapses to 2/(r - 1/2 - s)
    {
        ModelParams p{2, 0.5, 1.0};
        auto dp = d_polynomials(p);
        auto prod = dplus_dminus(p, dp);
        for (double s : {-0.1, 0.2, 1.0}) {
            CHECK(poly::eval(prod, s) ==
                  doctest::Approx(-0.5 * (s + 1.0) + 0.5).epsilon(1e-14));
            CHECK(rcut_algebraic(p, s) ==
                  doctest::Approx(2.0 / (p.r - 0.5 - s)).epsilon(1e-13));
        }
    }
    // degree 2N-3 and the factor identity D+D- = (value at a generic point)
    for (int N : {3, 6, 10}) {
        ModelParams p{N, 0.35, 1.0};
        auto dp = d_polynomials(p);
        auto prod = dplus_dminus(p, dp);
        CHECK(int(prod.size()) == 2 * N - 2);  // degree 2N-3
        for (double s : {0.15, 0.8}) {
            auto [dm, dpl] = d_factors(p, dp, s);
            CHECK(dm * dpl == doctest::Approx(poly::eval(prod, s)).epsilon(1e-11));
        }
    }
}

TEST_CASE("monic cut polynomial: N = 3 and N = 4 closed forms") {
    const double r = 0.3;
    {
        ModelParams p{3, r, 1.0};
        auto c = cut_polynomial(p);
        const double mu1 = 1.0 / 3.0;
        // sigma^3 + (mu_1 - r) sigma^2 - 4 r^2 mu_1
        REQUIRE(c.coeffs.size() == 4);
        CHECK(c.coeffs[3] == doctest::Approx(1.0));
        CHECK(c.coeffs[2] == doctest::Approx(mu1 - r).epsilon(1e-13));
        CHECK(c.coeffs[1] == doctest::Approx(0.0));
        CHECK(std::fabs(c.coeffs[0] + 4.0 * r * r * mu1) < 1e-14);
        // monic * scale_const must equal -mu_1 (D+D-) at matching arguments
        auto dp = d_polynomials(p);
        auto prod = dplus_dminus(p, dp);
        for (double s : {-0.05, 0.3}) {
            const double sig = s + r + mu1;
            CHECK(poly::eval(c.coeffs, sig) * c.scale_const ==
                  doctest::Approx(-mu1 * poly::eval(prod, s)).epsilon(1e-12));
        }
    }
    {
        ModelParams p{4, r, 1.0};
        auto c = cut_polynomial(p);
        const double m = 0.25;
        REQUIRE(c.coeffs.size() == 6);
        CHECK(c.coeffs[5] == doctest::Approx(1.0));
        CHECK(c.coeffs[4] == doctest::Approx(1.0 - r).epsilon(1e-12));
        CHECK(c.coeffs[3] == doctest::Approx((5.0 * m - 6.0 * r) * m).epsilon(1e-12));
        CHECK(c.coeffs[2] ==
              doctest::Approx((2.0 * m * m - 13.0 * m * r + r * r) * m).epsilon(1e-12));
        CHECK(c.coeffs[1] ==
              doctest::Approx(-2.0 * (1.0 - 7.0 * r) * m * m * r).epsilon(1e-12));
        CHECK(c.coeffs[0] ==
              doctest::Approx(2.0 * m * m * r * r - r * r * r).epsilon(1e-12));
    }
}

TEST_CASE("critical traffic intensities") {
    CHECK(critical_r(1) == doctest::Approx(0.0));
    CHECK(critical_r(2) == doctest::Approx(0.5));
    // N = 3 closed form: y = (1 + sqrt(1 - 2 mu_1))/2, r_c = y^2
    const double y3 = 0.5 * (1.0 + std::sqrt(1.0 - 2.0 / 3.0));
    CHECK(critical_r(3) == doctest::Approx(y3 * y3).epsilon(1e-10));
    const double table[] = {0.0, 0.5, 0.6220, 0.8400, 0.9352, 0.9740};
    for (int N = 1; N <= 6; ++N) {
        CHECK(std::fabs(critical_r(N) - table[N - 1]) < 1e-4);
    }
    // monotone increasing toward 1
    double prev = critical_r(2);
    for (int N = 3; N <= 20; ++N) {
        const double rc = critical_r(N);
        CHECK(rc > prev);
        CHECK(rc < 1.0);
        prev = rc;
    }
}

TEST_CASE("pole residues match the spectral weights") {
    for (auto [N, r] : std::vector<std::pair<int, double>>{
             {5, 0.5}, {4, 0.2}, {7, 0.4}, {10, 0.6}}) {
        ModelParams p{N, r, 1.0};
        SpectralEngine eng(p);
        auto ps = eng.find_poles();
        auto dp = d_polynomials(p);
        for (std::size_t i = 0; i < ps.zeta.size(); ++i) {
            const double res = algebraic_pole_residue(p, dp, ps.zeta[i]);
            CHECK(res > 0.0);
            // mixture convention: residue of phi_1 = weight * |zeta|
            CHECK(res == doctest::Approx(ps.weight[i] * std::fabs(ps.zeta[i]))
                             .epsilon(1e-8));
            // the vanishing factor at a physical pole is the psi_- one
            auto [dm, dpl] = d_factors(p, dp, ps.zeta[i]);
            CHECK(std::fabs(dm) < 1e-9 * std::fabs(dpl));
        }
    }
}
