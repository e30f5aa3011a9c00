#include <cmath>
#include <vector>

#include "busyper/asymptotics.hpp"
#include "busyper/model.hpp"
#include "busyper/spectral.hpp"
#include "busyper/stats.hpp"
#include "doctest.h"

using namespace busyper;

namespace {
constexpr double kEulerGamma = 0.57721566490153286;
}

TEST_CASE("Kummer zero families: brackets and interlacing") {
    for (double rho : {0.5, 0.75, 1.0, 1.9, 3.0}) {
        auto kz = kummer_zeros(rho, 31);
        REQUIRE(kz.chi.size() == 31);
        for (int l = 1; l <= 31; ++l) {
            // chi_l lies in (-l, -l+1)
            CHECK(kz.chi[l - 1] > -double(l));
            CHECK(kz.chi[l - 1] < -double(l - 1) + 1e-15);
        }
        // shifted family interlaces: chi_{l+1} < chi1_l < chi_l (tolerant of
        // zeros that have numerically merged with an integer endpoint)
        for (int l = 0; l < 30; ++l) {
            CHECK(kz.chi1[l] < kz.chi[l] + 1e-9);
            CHECK(kz.chi[l + 1] < kz.chi1[l] + 1e-9);
        }
    }
    // integer rho: the shifted family contains the exact zero -rho
    auto kz2 = kummer_zeros(2.0, 5);
    CHECK(kz2.chi1[1] == -2.0);
    // deep zeros pinch together: gap below 1e-3 by l = 30 at rho = 0.75
    auto kzd = kummer_zeros(0.75, 31);
    CHECK(std::fabs(kzd.chi[30] - kzd.chi1[29]) < 1e-3);

    CHECK_THROWS_AS(kummer_zeros(0.0, 5), std::domain_error);
    CHECK_THROWS_AS(kummer_zeros(0.5, 0), std::domain_error);
}

TEST_CASE("infinite-server mixture: mean, weights, hazard floor") {
    for (double rho : {0.5, 0.75, 1.9}) {
        auto m = mminf_mixture(rho);
        CHECK(m.total_weight() == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(m.mean() ==
              doctest::Approx((std::exp(rho) - 1.0) / rho).epsilon(1e-6));
        CHECK(m.sf(0.0) == doctest::Approx(1.0).epsilon(1e-8));
    }
    // hazard of the mixture stays above the dominant decay rate |chi_1|
    auto m = mminf_mixture(0.75);
    auto kz = kummer_zeros(0.75, 1);
    const double floor = -kz.chi[0];
    for (double t : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0}) {
        CHECK(m.pdf(t) / m.sf(t) >= floor - 1e-9);
    }
}

TEST_CASE("ergodic-boundary scale constant and limit law") {
    CHECK(unity_m_scale(1) == doctest::Approx(1.0));
    CHECK(unity_m_scale(2) == doctest::Approx(4.0).epsilon(1e-14));
    // m = (N^{N-1}/(N-1)!)^2
    CHECK(unity_m_scale(5) ==
          doctest::Approx(std::pow(625.0 / 24.0, 2)).epsilon(1e-12));
    // Stirling: m ~ e^{2N}/(2 pi N), within 2% at N = 30
    CHECK(unity_m_scale(30) / (std::exp(60.0) / (2.0 * M_PI * 30.0)) ==
          doctest::Approx(1.0).epsilon(0.02));

    const double m = 7.3;
    CHECK(unity_sf(0.0, m) == doctest::Approx(1.0));
    // pdf is minus the derivative of the SF
    for (double t : {0.2, 1.0, 8.0}) {
        const double h = 1e-6 * std::max(t, 1.0);
        const double fd = -(unity_sf(t + h, m) - unity_sf(t - h, m)) / (2.0 * h);
        CHECK(unity_pdf(t, m) == doctest::Approx(fd).epsilon(1e-7));
    }
    CHECK(unity_logmean(m) == doctest::Approx(std::log(m) - kEulerGamma));

    // log-mean by quadrature of ln(t) pdf(t) dt at m = 1; substitute t = u^2
    // and integrate geometric panels with Simpson
    double integral = 0.0;
    double a = 1e-8;
    {
        // [0, 1e-8] contributes ~ 4 u ln u / sqrt(pi), negligible at 1e-16;
        // the far tail of ln(t) pdf decays only like ln(t) t^{-3/2}, so the
        // range must reach t = u^2 = 1e16 before the remainder is below 1e-6
        double width = 1e-8;
        const double umax = 1e8;
        while (a < umax) {
            const double b = std::min(umax, a + width);
            const int n = 64;
            const double h = (b - a) / n;
            auto f = [](double u) {
                return 2.0 * u * std::log(u * u) * unity_pdf(u * u, 1.0);
            };
            double s = f(a) + f(b);
            for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
            integral += s * h / 3.0;
            a = b;
            width *= 1.9;
        }
    }
    CHECK(integral == doctest::Approx(-kEulerGamma).epsilon(1e-6));
}

TEST_CASE("two-exponential approximation at constant r") {
    // slow rate matches the dominant pole ever more closely as N grows
    for (int N : {40, 60}) {
        ModelParams p{N, 0.75, 1.0};
        auto a = const_r_two_exp(p);
        CHECK(std::fabs(a.nu / a.m_slow + a.zeta1) / std::fabs(a.zeta1) < 1e-3);
        CHECK(a.sf(0.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(a.nu > 0.0);
        CHECK(a.nu < 1.0);
    }
    // the slow-mode weight increases with N
    CHECK(const_r_two_exp(ModelParams{80, 0.75, 1.0}).nu >
          const_r_two_exp(ModelParams{20, 0.75, 1.0}).nu);

    // survival-function agreement with the exact law at (80, 0.75)
    ModelParams p{80, 0.75, 1.0};
    auto a = const_r_two_exp(p);
    auto d = bp_distribution(p);
    const double mean = exact_mean(p);
    for (double f : {0.05, 0.3, 1.0, 4.0, 10.0}) {
        CHECK(std::fabs(a.sf(f * mean) - d.sf(f * mean)) < 0.01);
    }

    CHECK_THROWS_AS(const_r_two_exp(ModelParams{5, 1.0, 1.0}), std::domain_error);
}
