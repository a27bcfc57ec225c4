#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "maccanon/admission.hpp"

using namespace maccanon;

TEST_CASE("the zero rate vector is always admitted") {
    ChannelSet ch = testutil::random_channel(2, 2, 1, 2, 1);
    SolveReport rep = adm_mac(ch, rvec::Zero(2), rvec::Ones(2));
    CHECK(rep.flag != 0);
}

TEST_CASE("scaled max-rate vertices sandwich the boundary") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        ChannelSet ch = testutil::random_channel(2, 2, 1, 2, 80 + seed);
        rvec e = rvec::Ones(2);
        SolveReport vertex = max_rmac(ch, e, rvec::Ones(2));
        rvec b = vertex.rates[0].totals;

        SolveReport in = adm_mac(ch, rvec(0.9 * b), e);
        CHECK((in.flag == 1 || in.flag == 2));
        SolveReport out = adm_mac(ch, rvec(1.1 * b), e);
        CHECK(out.flag == 0);
        // flag 0 carries a separating hyperplane
        CHECK(out.theta.minCoeff() >= 0.0);
        CHECK(out.theta.dot(rvec(1.1 * b)) > out.objective);
    }
}

TEST_CASE("midpoint of the two corner vertices needs time sharing") {
    ChannelSet ch = testutil::scalar_channel({1.0, 1.0});
    rvec e = rvec::Ones(2);
    // corners of the scalar pentagon: (1, log2(1.5)) and (log2(1.5), 1)
    rvec mid(2);
    mid.setConstant(0.5 * (1.0 + std::log2(1.5)));
    SolveReport rep = adm_mac(ch, rvec(0.999 * mid), e);
    REQUIRE(rep.flag == 2);
    CHECK(rep.alpha.size() >= 2);
    CHECK(rep.alpha.sum() == doctest::Approx(1.0).epsilon(1e-9));
    rvec combined = rep.combined_rates();
    CHECK(((combined - 0.999 * mid).array() >= -1e-6).all());
}

TEST_CASE("admitted reports are achievable with the returned plan") {
    ChannelSet ch = testutil::random_channel(3, 2, 1, 2, 91);
    rvec e = rvec::Ones(3);
    SolveReport vertex = max_rmac(ch, e, rvec::Ones(3));
    rvec b = 0.8 * vertex.rates[0].totals;
    SolveReport rep = adm_mac(ch, b, e);
    REQUIRE(rep.flag != 0);
    rvec combined = rvec::Zero(3);
    for (size_t k = 0; k < rep.rates.size(); ++k) {
        RateAllocation check = rates_for_order(ch, rep.plan, rep.rates[k].order);
        double a = rep.alpha.size() ? rep.alpha(static_cast<Eigen::Index>(k)) : 1.0;
        combined += a * check.totals;
    }
    CHECK(((combined - b).array() >= -1e-6).all());
    CHECK((rep.plan.energies(3).array() <= e.array() + 1e-8).all());
}

TEST_CASE("admission is monotone: scaling down an admitted point stays admitted") {
    ChannelSet ch = testutil::random_channel(2, 2, 1, 2, 101);
    rvec e = rvec::Ones(2);
    rvec b = 0.85 * max_rmac(ch, e, rvec::Ones(2)).rates[0].totals;
    REQUIRE(adm_mac(ch, b, e).flag != 0);
    CHECK(adm_mac(ch, rvec(0.5 * b), e).flag != 0);
}

TEST_CASE("adm_mac validates its inputs") {
    ChannelSet ch = testutil::random_channel(2, 2, 1, 1, 7);
    rvec e = rvec::Ones(2);
    rvec neg(2);
    neg << 0.1, -0.1;
    CHECK_THROWS_AS(adm_mac(ch, neg, e), ValidationError);
    CHECK_THROWS_AS(adm_mac(ch, rvec::Zero(2), rvec::Zero(2)), ValidationError);
}

TEST_CASE("boundary_b2 recovers the single-user capacity at b1 = 0") {
    ChannelSet ch = testutil::scalar_channel({1.0, 1.0});
    rvec e = rvec::Ones(2);
    double cap = boundary_b2(ch, e, 0.0, 1.5, 1e-3);
    CHECK(cap == doctest::Approx(1.0).epsilon(3e-3));  // log2(1 + 1)
}

TEST_CASE("boundary_b2 at the sum-rate face of the scalar pentagon") {
    ChannelSet ch = testutil::scalar_channel({1.0, 1.0});
    rvec e = rvec::Ones(2);
    // at b1 = log2(1.5) the corner allows b2 = 1
    double b2 = boundary_b2(ch, e, std::log2(1.5), 1.2, 1e-3);
    CHECK(b2 == doctest::Approx(1.0).epsilon(5e-3));
    // beyond the corner the sum-rate face binds: b1 + b2 <= log2(3)
    double b2b = boundary_b2(ch, e, 0.9, 1.0, 1e-3);
    CHECK(b2b == doctest::Approx(std::log2(3.0) - 0.9).epsilon(1e-2));
}

TEST_CASE("boundary_b2 returns zero past the user-1 capacity") {
    ChannelSet ch = testutil::scalar_channel({1.0, 1.0});
    rvec e = rvec::Ones(2);
    CHECK(boundary_b2(ch, e, 1.1, 1.0, 1e-3) == 0.0);
}

TEST_CASE("trace_region_2user produces a monotone boundary with correct corners") {
    ChannelSet ch = testutil::scalar_channel({1.0, 1.0});
    rvec e = rvec::Ones(2);
    auto pts = trace_region_2user(ch, e, 9);
    REQUIRE(pts.size() == 9);
    CHECK(pts.front().b1 == 0.0);
    CHECK(pts.front().b2 == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(pts.back().b1 == doctest::Approx(1.0).epsilon(5e-3));
    for (size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].b1 > pts[i - 1].b1);
        CHECK(pts[i].b2 <= pts[i - 1].b2 + 2e-3);
    }
    CHECK_THROWS_AS(trace_region_2user(ch, e, 1), ValidationError);
}
