#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maccanon/oracle.hpp"

using namespace maccanon;
using namespace maccanon::oracle;

TEST_CASE("waterfill on a two-mode diagonal channel") {
    cmat h = cmat::Zero(2, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 2.0;
    WaterfillResult r = waterfill(h, 1.0, 1);
    // gains 1 and 4; mu - 1 + mu - 1/4 = 1 => mu = 1.125
    CHECK(r.level == doctest::Approx(1.125).epsilon(1e-12));
    CHECK(r.powers.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.powers.minCoeff() == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(r.powers.maxCoeff() == doctest::Approx(0.875).epsilon(1e-10));
    CHECK(r.rate == doctest::Approx(std::log2(1.125) + std::log2(4.5)).epsilon(1e-10));
}

TEST_CASE("waterfill shuts off weak modes") {
    rvec g(2);
    g << 100.0, 0.01;
    WaterfillResult r = waterfill_gains(g, 0.1, 1);
    CHECK(r.powers(1) == 0.0);
    CHECK(r.powers(0) == doctest::Approx(0.1));
    CHECK(r.rate == doctest::Approx(std::log2(1.0 + 100.0 * 0.1)).epsilon(1e-12));
}

TEST_CASE("waterfill satisfies the KKT conditions") {
    std::mt19937_64 eng(31);
    for (int trial = 0; trial < 40; ++trial) {
        int m = 1 + static_cast<int>(eng() % 5);
        rvec g(m);
        for (int i = 0; i < m; ++i) g(i) = 0.05 + 3.0 * testutil::unif(eng);
        double e = 0.1 + 4.0 * testutil::unif(eng);
        WaterfillResult r = waterfill_gains(g, e, 1);
        CHECK(r.powers.sum() == doctest::Approx(e).epsilon(1e-10));
        CHECK(r.powers.minCoeff() >= -1e-15);
        for (int i = 0; i < m; ++i) {
            if (r.powers(i) > 1e-12) {
                CHECK(r.powers(i) + 1.0 / g(i) == doctest::Approx(r.level).epsilon(1e-10));
            } else {
                CHECK(1.0 / g(i) >= r.level - 1e-10);
            }
        }
    }
}

TEST_CASE("waterfill splits equally over symmetric modes") {
    rvec g = rvec::Constant(4, 2.0);
    WaterfillResult r = waterfill_gains(g, 2.0, 1);
    for (int i = 0; i < 4; ++i) CHECK(r.powers(i) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.rate == doctest::Approx(4.0 * std::log2(2.0)).epsilon(1e-12));
}

TEST_CASE("waterfill_channel matches per-tone waterfill on a flat channel") {
    ChannelSpec s;
    s.num_users = 1;
    s.rx_antennas = 2;
    s.tx_antennas = {2};
    s.num_tones = 4;
    s.taps = 1;
    s.seed = 5;
    ChannelSet ch = generate_channel(s);
    double cap = waterfill_channel(ch, 4.0);
    // flat channel: optimal split is 1.0 per tone on the same matrix
    WaterfillResult per = waterfill(ch.H[0][0], 1.0, ch.cb);
    CHECK(cap == doctest::Approx(4.0 * per.rate).epsilon(1e-10));
}

TEST_CASE("exact_membership agrees with hand-built hulls") {
    VertexSet v;
    rvec a(2), b(2), t(2);
    a << 0.0, 1.0;
    b << 1.0, 0.0;
    v.points = {a, b};
    t << 0.5, 0.5;
    CHECK(exact_membership(v, t));
    t << 0.55, 0.55;
    CHECK_FALSE(exact_membership(v, t));
    t << 1.0, 0.0;
    CHECK(exact_membership(v, t));
    t << 1.0 + 1e-3, 0.0;
    CHECK_FALSE(exact_membership(v, t));
}

TEST_CASE("brute force matches waterfilling for a single user") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        ChannelSet ch = testutil::random_channel(1, 2, 2, 1, 600 + seed);
        double e = 0.5 + 0.5 * static_cast<double>(seed);
        rvec th = rvec::Ones(1), en(1);
        en << e;
        WaterfillResult wf = waterfill(ch.H[0][0], e, ch.cb);
        BruteOptions opts;
        opts.restarts = 8;
        opts.max_iterations = 5000;
        double brute = brute_solve_maxrate(ch, en, th, opts);
        CHECK(brute == doctest::Approx(wf.rate).epsilon(1e-6));
    }
}

TEST_CASE("brute force reaches the scalar two-user sum capacity") {
    ChannelSet ch = testutil::scalar_channel({1.0, 1.0});
    rvec en(2), th = rvec::Ones(2);
    en << 1.0, 2.0;
    BruteOptions opts;
    opts.restarts = 8;
    opts.max_iterations = 5000;
    double brute = brute_solve_maxrate(ch, en, th, opts);
    CHECK(brute == doctest::Approx(std::log2(4.0)).epsilon(1e-6));
}

TEST_CASE("brute force is deterministic") {
    ChannelSet ch = testutil::random_channel(2, 2, 1, 1, 77);
    rvec en = rvec::Ones(2), th(2);
    th << 2.0, 1.0;
    BruteOptions opts;
    opts.restarts = 4;
    opts.max_iterations = 2000;
    CHECK(brute_solve_maxrate(ch, en, th, opts) == brute_solve_maxrate(ch, en, th, opts));
}
