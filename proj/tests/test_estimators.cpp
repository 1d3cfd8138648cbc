#include "doctest.h"

#include <cmath>

#include "stratrand/errors.hpp"
#include "stratrand/estimators.hpp"
#include "stratrand/rng.hpp"
#include "support/naive.hpp"

using namespace stratrand;

namespace {

// (z, arm, x, y) quadruples -> dataset with p inferred from use_x.
TrialDataset make(int k, bool use_x,
                  const std::vector<std::tuple<int, int, double, double>>& rows) {
    TrialDataset ds;
    ds.k = k;
    ds.p = use_x ? 1 : 0;
    std::int64_t id = 0;
    for (const auto& [z, arm, x, y] : rows) {
        SubjectRecord r;
        r.id = id++;
        r.stratum = StratumKey{z};
        r.arm = arm;
        r.y = y;
        r.x = Eigen::VectorXd(ds.p);
        if (use_x) r.x[0] = x;
        ds.subjects.push_back(r);
    }
    return ds;
}

// Two strata, three subjects per cell, exact decimal expectations:
//   z=0 arm1 (x,y): (0,1),(1,3),(2,2)   arm2: (0,3),(2,9),(4,9)
//   z=1 arm1:       (1,2),(3,3),(5,7)   arm2: (0,5),(1,4),(2,9)
TrialDataset hand12() {
    return make(2, true,
                {{0, 1, 0, 1}, {0, 1, 1, 3}, {0, 1, 2, 2},
                 {0, 2, 0, 3}, {0, 2, 2, 9}, {0, 2, 4, 9},
                 {1, 1, 1, 2}, {1, 1, 3, 3}, {1, 1, 5, 7},
                 {1, 2, 0, 5}, {1, 2, 1, 4}, {1, 2, 2, 9}});
}

} // namespace

TEST_CASE("ols_slope solves small systems and flags degenerate ones") {
    Eigen::MatrixXd g(1, 1);
    g << 2.0;
    Eigen::VectorXd c(1);
    c << 4.0;
    CHECK(ols_slope(g, c)[0] == doctest::Approx(2.0).epsilon(1e-14));

    // 2x2 SPD system against the closed-form adjugate inverse
    Eigen::MatrixXd g2(2, 2);
    g2 << 4.0, 1.0, 1.0, 3.0;
    Eigen::VectorXd c2(2);
    c2 << 5.0, -2.0;
    const double det = 4.0 * 3.0 - 1.0;
    const double b0 = (3.0 * 5.0 - 1.0 * -2.0) / det;
    const double b1 = (4.0 * -2.0 - 1.0 * 5.0) / det;
    const auto b = ols_slope(g2, c2);
    CHECK(b[0] == doctest::Approx(b0).epsilon(1e-10));
    CHECK(b[1] == doctest::Approx(b1).epsilon(1e-10));

    Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
    CHECK_THROWS_AS((void)ols_slope(zero, c), SingularGram);
    Eigen::MatrixXd rank1(2, 2);
    rank1 << 1.0, 1.0, 1.0, 1.0;
    CHECK_THROWS_AS((void)ols_slope(rank1, c2), SingularGram);
    CHECK(ols_slope(Eigen::MatrixXd(), Eigen::VectorXd()).size() == 0);
}

TEST_CASE("theta_hat on hand datasets") {
    // {z=a: arm1 y in {1,3}, arm2 y in {2}; z=b: arm1 y in {0}, arm2 y in {4,4}}
    const auto ds = make(2, false,
                         {{0, 1, 0, 1}, {0, 1, 0, 3}, {0, 2, 0, 2},
                          {1, 1, 0, 0}, {1, 2, 0, 4}, {1, 2, 0, 4}});
    CHECK(theta_hat(ds, {2, 1}) == doctest::Approx(2.0).epsilon(1e-14));

    SUBCASE("single stratum collapses to the mean difference") {
        const auto one = make(2, false, {{0, 1, 0, 1}, {0, 1, 0, 2}, {0, 2, 0, 5}});
        CHECK(theta_hat(one, {2, 1}) == doctest::Approx(3.5).epsilon(1e-14));
    }
    SUBCASE("constant outcomes give zero") {
        const auto c = make(2, false, {{0, 1, 0, 3}, {0, 2, 0, 3}, {1, 1, 0, 3}, {1, 2, 0, 3}});
        CHECK(theta_hat(c, {2, 1}) == 0.0);
    }
}

TEST_CASE("hand dataset matches exact spreadsheet values") {
    const auto ds = hand12();
    CHECK(theta_hat(ds, {2, 1}) == doctest::Approx(3.5).epsilon(1e-13));
    CHECK(theta_hat_A(ds, {2, 1}) == doctest::Approx(4.625).epsilon(1e-13));
    CHECK(theta_hat_B(ds, {2, 1}) == doctest::Approx(4.25).epsilon(1e-13));

    const auto coefs = beta_hats(summarize(ds));
    CHECK(coefs.per_arm.at(StratumKey{0})[0][0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(coefs.per_arm.at(StratumKey{0})[1][0] == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(coefs.per_arm.at(StratumKey{1})[0][0] == doctest::Approx(1.25).epsilon(1e-13));
    CHECK(coefs.per_arm.at(StratumKey{1})[1][0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(coefs.pooled.at(StratumKey{0})[0] == doctest::Approx(1.3).epsilon(1e-13));
    CHECK(coefs.pooled.at(StratumKey{1})[0] == doctest::Approx(1.4).epsilon(1e-13));
}

TEST_CASE("pooled slope averages arms through shared normal equations") {
    // two arms with slopes 2 and 4, equal sizes and identical x spread -> 3
    const auto ds = make(2, true,
                         {{0, 1, 0, 0}, {0, 1, 1, 2}, {0, 1, 2, 4}, {0, 1, 3, 6},
                          {0, 2, 0, 1}, {0, 2, 1, 5}, {0, 2, 2, 9}, {0, 2, 3, 13}});
    const auto coefs = beta_hats(summarize(ds));
    CHECK(coefs.per_arm.at(StratumKey{0})[0][0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(coefs.per_arm.at(StratumKey{0})[1][0] == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(coefs.pooled.at(StratumKey{0})[0] == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("exact within-cell linearity is fitted exactly") {
    const auto ds = make(2, true,
                         {{0, 1, 0, 1}, {0, 1, 1, 3}, {0, 1, 2, 5},
                          {0, 2, 0, 4}, {0, 2, 1, 6}, {0, 2, 2, 8}});
    const auto coefs = beta_hats(summarize(ds));
    CHECK(coefs.per_arm.at(StratumKey{0})[0][0] == doctest::Approx(2.0).epsilon(1e-14));
    // same slope both arms and a constant shift: every estimator sees theta=3
    CHECK(theta_hat_A(ds, {2, 1}) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(theta_hat_B(ds, {2, 1}) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("adjustment vanishes when arm x means equal the stratum mean") {
    const auto ds = make(2, true,
                         {{0, 1, -1, 1}, {0, 1, 0, 4}, {0, 1, 1, 4},
                          {0, 2, -1, 2}, {0, 2, 0, 8}, {0, 2, 1, 11}});
    const double th = theta_hat(ds, {2, 1});
    CHECK(theta_hat_A(ds, {2, 1}) == doctest::Approx(th).epsilon(1e-13));
    CHECK(theta_hat_B(ds, {2, 1}) == doctest::Approx(th).epsilon(1e-13));
}

TEST_CASE("contrast antisymmetry") {
    RngStream rng(2718);
    for (int rep = 0; rep < 20; ++rep) {
        const auto data = naive::random_dataset(rng);
        const auto sum = summarize(data.dataset);
        for (int t = 1; t <= data.k; ++t)
            for (int s = 1; s <= data.k; ++s) {
                if (t == s) continue;
                CHECK(theta_hat(sum, {t, s}) ==
                      doctest::Approx(-theta_hat(sum, {s, t})).epsilon(1e-12));
                CHECK(theta_hat_A(sum, {t, s}) ==
                      doctest::Approx(-theta_hat_A(sum, {s, t})).epsilon(1e-12));
                CHECK(theta_hat_B(sum, {t, s}) ==
                      doctest::Approx(-theta_hat_B(sum, {s, t})).epsilon(1e-12));
            }
    }
}

TEST_CASE("location and scale equivariance in y, affine invariance in x") {
    RngStream rng(31415);
    const auto data = naive::random_dataset(rng);
    const auto base = summarize(data.dataset);
    const double t0 = theta_hat(base, {2, 1});
    const double a0 = theta_hat_A(base, {2, 1});
    const double b0 = theta_hat_B(base, {2, 1});

    auto scaled = data.dataset;
    for (auto& s : scaled.subjects) s.y = 2.5 * *s.y - 7.0;
    const auto ssum = summarize(scaled);
    CHECK(theta_hat(ssum, {2, 1}) == doctest::Approx(2.5 * t0).epsilon(1e-11));
    CHECK(theta_hat_A(ssum, {2, 1}) == doctest::Approx(2.5 * a0).epsilon(1e-11));
    CHECK(theta_hat_B(ssum, {2, 1}) == doctest::Approx(2.5 * b0).epsilon(1e-11));

    if (data.p > 0) {
        auto xmap = data.dataset;
        for (auto& s : xmap.subjects) s.x = (3.0 * s.x).eval();
        for (auto& s : xmap.subjects) s.x.array() += 1.25;
        const auto xsum = summarize(xmap);
        CHECK(theta_hat_A(xsum, {2, 1}) == doctest::Approx(a0).epsilon(1e-10));
        CHECK(theta_hat_B(xsum, {2, 1}) == doctest::Approx(b0).epsilon(1e-10));
    }
}

TEST_CASE("estimators agree with naive reconstruction on random data") {
    RngStream rng(65537);
    for (int rep = 0; rep < 30; ++rep) {
        const auto data = naive::random_dataset(rng);
        const auto sum = summarize(data.dataset);
        const double th = theta_hat(sum, {2, 1});
        const double ta = theta_hat_A(sum, {2, 1});
        const double tb = theta_hat_B(sum, {2, 1});
        CHECK(th == doctest::Approx(naive::theta(data.rows, data.k, 2, 1)).epsilon(1e-10));
        CHECK(ta == doctest::Approx(naive::theta_A(data.rows, data.k, data.p, 2, 1)).epsilon(1e-10));
        CHECK(tb == doctest::Approx(naive::theta_B(data.rows, data.k, data.p, 2, 1)).epsilon(1e-10));
    }
}

TEST_CASE("p = 0 degrades the adjusted estimators to theta_hat") {
    const auto ds = make(2, false,
                         {{0, 1, 0, 1}, {0, 1, 0, 2}, {0, 2, 0, 4}, {0, 2, 0, 7},
                          {1, 1, 0, 0}, {1, 1, 0, 1}, {1, 2, 0, 2}, {1, 2, 0, 5}});
    const double th = theta_hat(ds, {2, 1});
    CHECK(theta_hat_A(ds, {2, 1}) == th);
    CHECK(theta_hat_B(ds, {2, 1}) == th);
}

TEST_CASE("error taxonomy: empty cells, thin cells, degenerate covariates") {
    SUBCASE("missing arm in a stratum") {
        const auto ds = make(2, false,
                             {{0, 1, 0, 1}, {0, 2, 0, 2}, {1, 1, 0, 3}});
        CHECK_THROWS_WITH_AS((void)theta_hat(ds, {2, 1}),
                             doctest::Contains("(1)"), EmptyCell);
        EstimateOptions opts;
        opts.drop_incomplete_strata = true;
        std::vector<std::string> warnings;
        opts.warnings = &warnings;
        CHECK(theta_hat(summarize(ds), {2, 1}, opts) == doctest::Approx(1.0));
        CHECK(warnings.size() == 1);
    }
    SUBCASE("cell below the slope floor") {
        const auto ds = make(2, true,
                             {{0, 1, 0, 1}, {0, 1, 1, 2}, {0, 2, 0, 3}, {0, 2, 1, 5}});
        CHECK_NOTHROW((void)theta_hat(ds, {2, 1}));   // means are fine
        CHECK_THROWS_AS((void)theta_hat_A(ds, {2, 1}), InsufficientCell);
    }
    SUBCASE("constant covariate within a cell") {
        const auto ds = make(2, true,
                             {{0, 1, 1, 1}, {0, 1, 1, 2}, {0, 1, 1, 3},
                              {0, 2, 0, 1}, {0, 2, 1, 2}, {0, 2, 2, 3}});
        CHECK_THROWS_AS((void)theta_hat_A(ds, {2, 1}), SingularGram);
    }
    SUBCASE("invalid contrast") {
        const auto ds = make(2, false, {{0, 1, 0, 1}, {0, 2, 0, 2}});
        CHECK_THROWS_AS((void)theta_hat(ds, {1, 1}), ConfigMismatch);
        CHECK_THROWS_AS((void)theta_hat(ds, {3, 1}), ConfigMismatch);
    }
}

TEST_CASE("reweighting after adding a neutral stratum") {
    // adding a stratum with equal arm means rescales theta by old_n/new_n
    auto rows = std::vector<std::tuple<int, int, double, double>>{
        {0, 1, 0, 1}, {0, 1, 0, 3}, {0, 2, 0, 5}, {0, 2, 0, 7}};
    const auto base = make(2, false, rows);
    const double t0 = theta_hat(base, {2, 1});
    for (int i = 0; i < 4; ++i) rows.push_back({1, 1 + i % 2, 0, 2.0});
    const auto grown = make(2, false, rows);
    CHECK(theta_hat(grown, {2, 1}) == doctest::Approx(t0 * 4.0 / 8.0).epsilon(1e-13));
}
