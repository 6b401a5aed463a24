#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "voxrec/rng.hpp"
#include "voxrec/theory.hpp"

using namespace voxrec::theory;
using voxrec::Rng;

namespace {
const double kLog2 = std::log(2.0);
const double kLog4 = std::log(4.0);
}  // namespace

TEST_CASE("distributions validate their invariants", "[theory]") {
    CHECK_NOTHROW(DiscreteDist({0.25, 0.75}));
    CHECK_THROWS_AS(DiscreteDist({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteDist({-0.1, 1.1}), std::invalid_argument);
    CHECK_THROWS_AS(JointDist(DiscreteDist({0.5, 0.5}), {{0.5, 0.4}, {0.5, 0.5}}),
                    std::invalid_argument);
}

TEST_CASE("kl divergence basics", "[theory]") {
    const DiscreteDist p({0.2, 0.3, 0.5});
    CHECK(kl(p, p) == 0.0);
    CHECK(kl(DiscreteDist({1.0, 0.0}), DiscreteDist({0.5, 0.5})) ==
          Catch::Approx(kLog2).epsilon(1e-15));
    CHECK(std::isinf(kl(DiscreteDist({0.5, 0.5}), DiscreteDist({1.0, 0.0}))));

    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const DiscreteDist a = DiscreteDist::random(6, rng);
        const DiscreteDist b = DiscreteDist::random(6, rng);
        double expected = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] > 0.0) expected += a[i] * std::log(a[i] / b[i]);
        CHECK(std::abs(kl(a, b) - expected) < 1e-12);
        CHECK(kl(a, b) >= -1e-12);
    }
}

TEST_CASE("js divergence is symmetric and bounded", "[theory]") {
    const DiscreteDist p({0.1, 0.9});
    CHECK(js(p, p) == 0.0);
    CHECK(js(DiscreteDist({1.0, 0.0}), DiscreteDist({0.0, 1.0})) ==
          Catch::Approx(kLog2).epsilon(1e-15));
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const DiscreteDist a = DiscreteDist::random(5, rng);
        const DiscreteDist b = DiscreteDist::random(5, rng);
        const double ab = js(a, b);
        CHECK(std::abs(ab - js(b, a)) < 1e-14);
        CHECK(ab >= 0.0);
        CHECK(ab <= kLog2 + 1e-15);
    }
}

TEST_CASE("matched joints make the optimal discriminator one half", "[theory]") {
    Rng rng(7);
    const JointDist p = JointDist::random(3, 5, rng);
    const auto d = optimal_disc(p, p);
    for (std::size_t c = 0; c < p.categories(); ++c)
        for (std::size_t x = 0; x < p.outcomes(); ++x)
            if (p.joint(c, x) > 0.0) CHECK(d[c][x] == 0.5);
}

TEST_CASE("matched conditionals reduce the discriminator to the marginal ratio", "[theory]") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const JointDist p = JointDist::random(4, 6, rng);
        std::vector<std::vector<double>> cond;
        for (std::size_t c = 0; c < 4; ++c) {
            cond.emplace_back();
            for (std::size_t x = 0; x < 6; ++x) cond.back().push_back(p.conditional(c, x));
        }
        const DiscreteDist q_c = DiscreteDist::random(4, rng);
        const JointDist q(q_c, std::move(cond));
        const auto d = optimal_disc(p, q);
        for (std::size_t c = 0; c < 4; ++c) {
            const double expected = p.marginal()[c] / (p.marginal()[c] + q_c[c]);
            for (std::size_t x = 0; x < 6; ++x)
                if (p.joint(c, x) + q.joint(c, x) > 0.0)
                    CHECK(d[c][x] == Catch::Approx(expected).margin(1e-14));
        }
    }
}

TEST_CASE("optimal discriminator matches the elementwise formula", "[theory]") {
    Rng rng(11);
    const JointDist p = JointDist::random(3, 7, rng);
    const JointDist q = JointDist::random(3, 7, rng);
    const auto d = optimal_disc(p, q);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t x = 0; x < 7; ++x) {
            const double pj = p.joint(c, x), qj = q.joint(c, x);
            CHECK(std::abs(d[c][x] - pj / (pj + qj)) < 1e-14);
            CHECK(d[c][x] >= 0.0);
            CHECK(d[c][x] <= 1.0);
        }
}

TEST_CASE("criterion anchors: matched joints and disjoint categories", "[theory]") {
    Rng rng(13);
    const JointDist p = JointDist::random(4, 5, rng);
    CHECK(criterion(p, p) == Catch::Approx(-kLog4).margin(1e-12));

    // Same conditionals, fully disjoint category marginals.
    std::vector<std::vector<double>> cond{{0.3, 0.7}, {0.6, 0.4}};
    const JointDist pd(DiscreteDist({1.0, 0.0}), cond);
    const JointDist qd(DiscreteDist({0.0, 1.0}), cond);
    CHECK(criterion(pd, qd) == Catch::Approx(0.0).margin(1e-12));
    CHECK(js(pd.marginal(), qd.marginal()) == Catch::Approx(kLog2).epsilon(1e-15));
}

TEST_CASE("criterion with matched conditionals equals the closed form", "[theory]") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t categories = 5;
        const JointDist p = JointDist::random(categories, 6, rng);
        std::vector<std::vector<double>> cond;
        for (std::size_t c = 0; c < categories; ++c) {
            cond.emplace_back();
            for (std::size_t x = 0; x < 6; ++x) cond.back().push_back(p.conditional(c, x));
        }
        const DiscreteDist q_c = DiscreteDist::random(categories, rng);
        const JointDist q(q_c, std::move(cond));
        const double expected = -kLog4 + 2.0 * js(p.marginal(), q_c);
        CHECK(std::abs(criterion(p, q) - expected) < 1e-12);
    }
}

TEST_CASE("the matched-conditional anchor trial hits the equality branch", "[theory]") {
    Rng rng(17);
    const JointDist p = JointDist::random(3, 8, rng);
    const DiscreteDist q_c = DiscreteDist::random(3, rng);
    const GlobalMinReport report = verify_global_min(p, q_c, 1, rng);
    REQUIRE(report.trials.size() == 1);
    CHECK(report.trials[0].equality);
    CHECK(report.trials[0].max_cond_l1 < 1e-6);
    CHECK(report.pass());
}

TEST_CASE("randomized search finds no criterion below the bound", "[theory]") {
    Rng rng(19);
    const JointDist p = JointDist::random(3, 8, rng);
    const DiscreteDist q_c = DiscreteDist::random(3, rng);
    const GlobalMinReport report = verify_global_min(p, q_c, 1000, rng);
    CHECK(report.bound_violations == 0);
    CHECK(report.equality_mismatches == 0);
    CHECK(report.min_gap >= -1e-10);
    CHECK(report.pass());
}

TEST_CASE("a perturbed conditional opens a strict gap", "[theory]") {
    Rng rng(21);
    const JointDist p = JointDist::random(3, 8, rng);
    std::vector<std::vector<double>> cond;
    for (std::size_t c = 0; c < 3; ++c) {
        cond.emplace_back();
        for (std::size_t x = 0; x < 8; ++x) cond.back().push_back(p.conditional(c, x));
    }
    // Move 0.1 probability mass between two cells of one row.
    const double delta = std::min(0.1, cond[1][2]);
    REQUIRE(delta > 1e-3);
    cond[1][2] -= delta;
    cond[1][5] += delta;
    const DiscreteDist q_c = DiscreteDist::random(3, rng);
    const JointDist q(q_c, std::move(cond));
    const double bound = -kLog4 + 2.0 * js(p.marginal(), q_c);
    CHECK(criterion(p, q) - bound > 1e-6);
}
