#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maccanon/ellipsoid.hpp"

using namespace maccanon;

TEST_CASE("single step matches the update rule arithmetic") {
    Ellipsoid e(rvec::Zero(2), 1.0);
    rvec g(2);
    g << 1.0, 0.0;
    e.step(g);
    CHECK(e.center()(0) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(e.center()(1) == doctest::Approx(0.0));
    CHECK(e.shape()(0, 0) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
    CHECK(e.shape()(1, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(e.shape()(0, 1)) < 1e-15);
}

TEST_CASE("cut is invariant to subgradient scaling") {
    rvec g(2);
    g << 0.3, -0.8;
    Ellipsoid a(rvec::Ones(2), 2.0), b(rvec::Ones(2), 2.0);
    a.step(g);
    b.step(rvec(2.0 * g));
    CHECK((a.center() - b.center()).norm() < 1e-14);
    CHECK((a.shape() - b.shape()).norm() < 1e-14);
}

TEST_CASE("volume contracts by the dimension-dependent factor") {
    std::mt19937_64 eng(3);
    for (int u : {2, 3, 5}) {
        Ellipsoid e(rvec::Zero(u), 1.5);
        double ratio = (u / (u + 1.0)) * std::pow(u * u / (u * u - 1.0), (u - 1.0) / 2.0);
        for (int it = 0; it < 20; ++it) {
            double det_before = e.shape().determinant();
            rvec g(u);
            for (int i = 0; i < u; ++i) g(i) = testutil::unif(eng) - 0.5;
            e.step(g);
            double det_after = e.shape().determinant();
            CHECK(std::sqrt(det_after / det_before) == doctest::Approx(ratio).epsilon(1e-10));
        }
    }
}

TEST_CASE("shape matrix stays symmetric") {
    std::mt19937_64 eng(4);
    Ellipsoid e(rvec::Zero(3), 10.0);
    for (int it = 0; it < 200; ++it) {
        rvec g(3);
        for (int i = 0; i < 3; ++i) g(i) = testutil::unif(eng) - 0.5;
        e.step(g);
        CHECK((e.shape() - e.shape().transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("constraint cut moves a negative coordinate toward the orthant") {
    rvec x(2);
    x << -0.5, 0.25;
    Ellipsoid e(x, 2.0);
    e.constraint_cut(0);
    CHECK(e.center()(0) >= 0.0);
    CHECK(e.center()(1) == doctest::Approx(0.25));

    // a ball only tangent to the orthant collapses: repeated central cuts
    // approach x = 0 geometrically but never reach it
    rvec y(2);
    y << -1.0, 0.0;
    Ellipsoid bad(y, 1.0);
    CHECK_THROWS_AS(bad.constraint_cut(0), EllipsoidBreakdown);
}

TEST_CASE("constraint cut is a no-op on a nonnegative coordinate") {
    Ellipsoid e(rvec::Ones(2), 1.0);
    int before = e.iterations();
    e.constraint_cut(0);
    CHECK(e.iterations() == before);
}

TEST_CASE("constraint cuts preserve feasible points inside the ellipsoid") {
    std::mt19937_64 eng(5);
    for (int trial = 0; trial < 40; ++trial) {
        rvec c(2);
        c << -testutil::unif(eng), testutil::unif(eng) - 0.5;
        double r = 1.0 + testutil::unif(eng);
        Ellipsoid e(c, r);
        // sample a nonnegative point inside the initial ball
        rvec p;
        do {
            p = c + r * rvec::NullaryExpr(2, [&](Eigen::Index) { return 2.0 * testutil::unif(eng) - 1.0; });
        } while ((p - c).norm() > r || p.minCoeff() < 0.0);
        e.constraint_cut(0);
        rmat inv = e.shape().inverse();
        CHECK((p - e.center()).dot(inv * (p - e.center())) <= 1.0 + 1e-9);
    }
}

TEST_CASE("stop metric equals the norm under the identity shape") {
    Ellipsoid e(rvec::Zero(3), 1.0);
    rvec g(3);
    g << 3.0, 0.0, 4.0;
    CHECK(e.stop_metric(g) == doctest::Approx(5.0));
    CHECK(e.stop_metric(rvec::Zero(3)) == 0.0);
}

TEST_CASE("minimizer stays inside the localization set on a 2-D quadratic") {
    rvec opt(2);
    opt << 0.4, -0.0;  // inside the nonnegative orthant boundary
    opt(1) = 0.3;
    Ellipsoid e(rvec::Zero(2), 4.0);
    for (int it = 0; it < 60; ++it) {
        rvec g = 2.0 * (e.center() - opt);  // gradient of ||x - opt||^2
        if (g.norm() < 1e-14) break;
        e.step(g);
        rmat inv = e.shape().inverse();
        CHECK((opt - e.center()).dot(inv * (opt - e.center())) <= 1.0 + 1e-8);
    }
    CHECK((e.center() - opt).norm() < 0.1);
}

TEST_CASE("one-dimensional state bisects the interval") {
    Ellipsoid e(rvec::Zero(1), 2.0);
    rvec g(1);
    g << 1.0;
    e.step(g);  // keep left half: [-2, 0]
    CHECK(e.center()(0) == doctest::Approx(-1.0));
    CHECK(std::sqrt(e.shape()(0, 0)) == doctest::Approx(1.0));

    // converge onto a 1-D minimizer
    double target = 0.7;
    Ellipsoid e2(rvec::Zero(1), 4.0);
    for (int it = 0; it < 60; ++it) {
        rvec grad(1);
        grad << (e2.center()(0) - target);
        if (std::abs(grad(0)) < 1e-15) break;
        e2.step(grad);
    }
    CHECK(e2.center()(0) == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("empirical iteration count respects the theoretical bound") {
    // minimize ||x - opt||^2 over the ball of radius R; subgradient norm <= G
    int u = 3;
    double radius = 10.0, eps = 1e-5;
    rvec opt = rvec::Constant(u, 1.0);
    Ellipsoid e(rvec::Zero(u), radius);
    double g_bound = 2.0 * 2.0 * radius;
    double bound = 2.0 * (u + 1.0) * u * std::log(radius * g_bound / eps);
    int it = 0;
    for (; it < static_cast<int>(bound) + 1; ++it) {
        rvec g = 2.0 * (e.center() - opt);
        if (e.stop_metric(g) <= eps) break;
        e.step(g);
    }
    CHECK(static_cast<double>(it) <= bound);
}

TEST_CASE("zero cut vector is rejected") {
    Ellipsoid e(rvec::Zero(2), 1.0);
    CHECK_THROWS_AS(e.step(rvec::Zero(2)), EllipsoidBreakdown);
}
