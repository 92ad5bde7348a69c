#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enclosure/analytic_fields.hpp"

#include <cmath>

using namespace enclosure;

TEST_CASE("varphi closed forms") {
    CHECK(varphi(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    for (double x : {0.3, 0.999999, 1.000001, 2.0, 7.5}) {
        double direct = x * std::cosh(x) - std::sinh(x);
        CHECK(varphi(x) == doctest::Approx(direct).epsilon(1e-12));
        CHECK(varphi_scaled(x) * std::exp(x) == doctest::Approx(direct).epsilon(1e-12));
    }
    // small argument: x^3 / 3 leading term
    CHECK(varphi(1e-4) == doctest::Approx(1e-12 / 3.0).epsilon(1e-7));
    // no overflow far out
    CHECK(std::isfinite(varphi_scaled(5000.0)));
}

TEST_CASE("v_f at the centre and across the source sphere") {
    BallSource b{Vec3::Zero(), 1.0};
    // (1 - (1 + tau eta) e^{-tau eta}) / tau^2 at the centre
    CHECK(v_f(b, Vec3::Zero(), 1.0) == doctest::Approx(1.0 - 2.0 / std::exp(1.0)).epsilon(1e-13));
    BallSource s{Vec3(0.1, 0.2, 0.3), 0.5};
    Vec3 n = Vec3(1, 2, 2).normalized();
    for (double tau : {0.5, 4.0, 40.0}) {
        double in = v_f(s, s.p + (0.5 - 1e-9) * n, tau), out = v_f(s, s.p + (0.5 + 1e-9) * n, tau);
        CHECK(in == doctest::Approx(out).epsilon(1e-7));
    }
    CHECK_THROWS_WITH_AS(v_f(s, s.p, 0.0), doctest::Contains("NonPositiveTau"), Error);
    CHECK_THROWS_WITH_AS(grad_v_f(s, s.p + 0.3 * n, 2.0), doctest::Contains("InsideSource"), Error);
}

TEST_CASE("v_f solves the modified Helmholtz equation") {
    BallSource s{Vec3::Zero(), 0.5};
    const double tau = 3.0, h = 1e-3;
    auto residual = [&](const Vec3& x) {
        double lap = 0.0;
        for (int a = 0; a < 3; ++a) {
            Vec3 e = Vec3::Zero();
            e[a] = h;
            lap += (v_f(s, x + e, tau) - 2.0 * v_f(s, x, tau) + v_f(s, x - e, tau)) / (h * h);
        }
        return tau * tau * v_f(s, x, tau) - lap;
    };
    CHECK(residual(Vec3(0.1, 0.05, -0.2)) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(std::abs(residual(Vec3(0.4, 0.7, 0.2))) < 1e-5);
}

TEST_CASE("exterior gradient against finite differences") {
    BallSource s{Vec3(0.0, 0.0, 1.0), 0.5};
    Vec3 x(0.3, -0.4, 2.1);
    const double tau = 5.0, h = 1e-5;
    Vec3 g = grad_v_f(s, x, tau), fd;
    for (int a = 0; a < 3; ++a) {
        Vec3 e = Vec3::Zero();
        e[a] = h;
        fd[a] = (v_f(s, x + e, tau) - v_f(s, x - e, tau)) / (2 * h);
    }
    CHECK((g - fd).norm() < 1e-8 * g.norm());
}

TEST_CASE("mean-value identities reproduce the point value") {
    Vec3 c(0.0, 0.0, 3.0), x = Vec3::Zero();
    for (double tau : {1.0, 10.0, 100.0}) {
        Field3 psi = [&](const Vec3& z) {
            double r = (z - c).norm();
            return std::exp(-tau * (r - 3.0)) / r;
        };
        for (double r : {0.1, 0.3, 1.0, 2.0}) {
            if (tau * r > 30.0) continue;
            CAPTURE(tau);
            CAPTURE(r);
            double pv = psi(x);
            CHECK(std::abs(mean_value_sphere(psi, x, r, tau) / pv - 1.0) < 1e-8);
            CHECK(std::abs(mean_value_ball(psi, x, r, tau) / pv - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("plain integrals of polynomials are exact") {
    Field3 f = [](const Vec3& z) { return z.squaredNorm(); };
    // surface: r^2 * 4 pi r^2 ; ball: 4 pi r^5 / 5
    CHECK(sphere_integral(f, Vec3::Zero(), 2.0, 0) == doctest::Approx(4 * kPi * 16).epsilon(1e-13));
    CHECK(ball_integral(f, Vec3::Zero(), 2.0, 6, 0) == doctest::Approx(4 * kPi * 32 / 5).epsilon(1e-13));
}
