#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include <betabox/rng.hpp>
#include <betabox/sampling.hpp>
#include <betabox/stats.hpp>
#include <betabox/transform.hpp>

using namespace betabox;

namespace {

const TubeSet kThree({100.0, 150.0, 200.0});

TubeSet random_tubes(std::uint64_t seed, int n) {
    rng::Stream s(seed, rng::Domain::search, 7);
    std::vector<double> len;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += 20.0 + 180.0 * s.next();
        len.push_back(acc);
    }
    return TubeSet(len);
}

// success_rate is a binomial proportion over the raw candidate count
void check_rate(const SamplingStats& st, double sigmas) {
    double p = st.theoretical_rate;
    double sd = std::sqrt(p * (1.0 - p) / double(st.raw_draws));
    INFO("success " << st.success_rate << " expected " << p << " over " << st.raw_draws);
    CHECK(std::abs(st.success_rate - p) < sigmas * sd);
}

}  // namespace

TEST_CASE("rejection success rates match the acceptance probability") {
    auto a = batch_stats(sample_reject_a(kThree, 20000, 11), kThree);
    auto b = batch_stats(sample_reject_b(kThree, 20000, 11), kThree);
    CHECK(a.theoretical_rate == Catch::Approx(1.0 / 12.0).margin(1e-15));
    check_rate(a, 4.0);
    check_rate(b, 4.0);

    // holding the outermost component does not change the acceptance odds,
    // so the attempt counts of the two methods are draws from one law
    CHECK(std::abs(a.mean_attempts - b.mean_attempts) < 0.5);

    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        auto tubes = random_tubes(seed, 3);
        auto st = batch_stats(sample_reject_a(tubes, 5000, seed), tubes);
        check_rate(st, 4.0);
    }
}

TEST_CASE("the acceptance probability equals the volume ratio") {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        for (int n : {1, 2, 3, 5}) {
            auto tubes = random_tubes(seed, n);
            auto t = build_transform(tubes);
            double box = 1.0;
            for (double L : tubes.lengths()) box *= L;
            CHECK(theoretical_success_rate(tubes) ==
                  Catch::Approx(std::abs(t.determinant) / box).epsilon(1e-12));
        }
    }
    CHECK(theoretical_success_rate(TubeSet({100.0})) == 1.0);
    CHECK(theoretical_success_rate(TubeSet({100.0, 200.0})) == 0.5);
    // scale invariance and crowding: only the length ratios matter, and a
    // tube squeezed toward its neighbour shrinks the feasible share
    CHECK(theoretical_success_rate(TubeSet({1.0, 1.5, 2.0})) ==
          Catch::Approx(theoretical_success_rate(kThree)).epsilon(1e-15));
    CHECK(theoretical_success_rate(TubeSet({100.0, 180.0, 200.0})) <
          theoretical_success_rate(kThree));
}

TEST_CASE("held-component methods keep the held draw and its distribution") {
    const std::uint64_t seed = 31;
    auto b = sample_reject_b(kThree, 5000, seed);
    REQUIRE(b.failures() == 0);
    REQUIRE(b.accepted() == 5000);

    // the held draw lives at slot 0 of the sample's stream, bit for bit
    std::vector<double> first;
    for (std::uint64_t k = 0; k < 5000; ++k) {
        double u = rng::uniform_at(seed, rng::Domain::sampling, 1 + k, 0);
        REQUIRE(b.beta(static_cast<Eigen::Index>(k), 0) == -100.0 * u);
        first.push_back(b.beta(static_cast<Eigen::Index>(k), 0));
    }

    // acceptance odds are flat in the held value, so it stays uniform
    auto ks = stats::ks_test(first, [](double x) { return 1.0 + x / 100.0; });
    CHECK(ks.p_value > 0.01);

    // same bookkeeping for the middle component, skipping failed requests
    auto c = sample_reject_c(kThree, 5000, seed);
    Eigen::Index row = 0;
    for (std::uint64_t k = 0; k < 5000; ++k) {
        if (c.failed[k]) continue;
        double u = rng::uniform_at(seed, rng::Domain::sampling, 1 + k, 0);
        REQUIRE(c.beta(row, 1) == -150.0 * u);
        ++row;
    }
    REQUIRE(row == static_cast<Eigen::Index>(c.accepted()));
}

TEST_CASE("failure rates split the held-component family") {
    const std::uint64_t n = 20000;
    auto b = batch_stats(sample_reject_b(kThree, n, 5), kThree);
    auto c = batch_stats(sample_reject_c(kThree, n, 5), kThree);
    auto d = batch_stats(sample_reject_d(kThree, n, 5), kThree);

    CHECK(b.failed == 0);
    CHECK(c.failed > 0);
    CHECK(c.fail_rate < 0.02);
    CHECK(d.fail_rate > 0.02);
    CHECK(d.fail_rate < 0.10);

    // every accepted sample satisfies the constraint chains
    for (const auto* st : {&b, &c, &d})
        CHECK(st->accepted + st->failed == n);
}

TEST_CASE("direct draws are always feasible") {
    auto batch = sample_direct(kThree, 10000, 17);
    REQUIRE(batch.accepted() == 10000);
    CHECK(batch.raw_draws == 10000);
    for (Eigen::Index r = 0; r < batch.beta.rows(); ++r) {
        Eigen::VectorXd row = batch.beta.row(r);
        if (!check_constraints(kThree, row, 1e-9).valid) {
            INFO("row " << r << ": " << row.transpose());
            REQUIRE(false);
        }
    }

    // higher dimensional sets work the same way
    auto tubes = random_tubes(3, 6);
    auto big = sample_direct(tubes, 2000, 17);
    for (Eigen::Index r = 0; r < big.beta.rows(); ++r) {
        Eigen::VectorXd row = big.beta.row(r);
        REQUIRE(check_constraints(tubes, row, 1e-9).valid);
    }
}

TEST_CASE("the batch path reproduces the scalar path bit for bit") {
    for (bool sq : {false, true}) {
        auto one = sample_direct(kThree, 10000, 23, sq);
        auto bulk = sample_direct_batch(kThree, 10000, 23, sq, 4);
        REQUIRE(one.beta.rows() == bulk.beta.rows());
        for (Eigen::Index r = 0; r < one.beta.rows(); ++r)
            for (Eigen::Index i = 0; i < one.beta.cols(); ++i)
                REQUIRE(one.beta(r, i) == bulk.beta(r, i));
    }

    // below the sharding threshold and with one thread as well
    auto one = sample_direct(kThree, 100, 29);
    auto bulk = sample_direct_batch(kThree, 100, 29, false, 8);
    REQUIRE((one.beta - bulk.beta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the square root reshaping biases toward retraction") {
    const std::uint64_t n = 20000;
    auto plain = sample_direct_batch(kThree, n, 41, false);
    auto shaped = sample_direct_batch(kThree, n, 41, true);

    std::vector<double> u_plain, u_shaped;
    for (std::uint64_t k = 0; k < n; ++k) {
        u_plain.push_back(-plain.beta(static_cast<Eigen::Index>(k), 0) / 100.0);
        u_shaped.push_back(-shaped.beta(static_cast<Eigen::Index>(k), 0) / 100.0);
    }
    auto ks_u = stats::ks_test(u_plain, [](double x) { return x; });
    auto ks_s = stats::ks_test(u_shaped, [](double x) { return x * x; });
    CHECK(ks_u.p_value > 0.01);
    CHECK(ks_s.p_value > 0.01);

    // mean of sqrt(U) is 2/3, so the average retraction deepens
    double mean = 0.0;
    for (double v : u_shaped) mean += v;
    mean /= double(n);
    CHECK(mean == Catch::Approx(2.0 / 3.0).margin(4.0 * std::sqrt(1.0 / 18.0 / double(n))));
}

TEST_CASE("direct and rejection sampling agree in distribution") {
    auto direct = sample_direct_batch(kThree, 3000, 47);
    auto reject = sample_reject_a(kThree, 3000, 47);
    for (Eigen::Index i = 0; i < 3; ++i) {
        std::vector<double> x, y;
        for (Eigen::Index r = 0; r < direct.beta.rows(); ++r) x.push_back(direct.beta(r, i));
        for (Eigen::Index r = 0; r < reject.beta.rows(); ++r) y.push_back(reject.beta(r, i));
        auto ks = stats::ks_test_two_sample(x, y);
        INFO("component " << i << " D " << ks.statistic);
        CHECK(ks.p_value > 0.01);
    }
}

TEST_CASE("component marginals match the convolution reference") {
    // closed form at one point: for lengths (100, 150) the second component
    // is minus a sum of uniform(0,100) and uniform(0,50), and the mass
    // beyond 125 of retraction is 1/16
    TubeSet two({100.0, 150.0});
    MarginalCdf ref2(two, 1);
    CHECK(ref2(-125.0) == Catch::Approx(0.0625).margin(1e-5));
    CHECK(ref2(0.0) == 1.0);
    CHECK(ref2(-150.0) == 0.0);

    // the outermost component is exactly uniform
    MarginalCdf ref0(kThree, 0);
    for (double b : {-90.0, -50.0, -12.5, -1.0})
        CHECK(ref0(b) == Catch::Approx(1.0 + b / 100.0).margin(1e-9));

    // monotone in the argument
    MarginalCdf ref1(kThree, 1);
    double prev = 0.0;
    for (int j = 0; j <= 200; ++j) {
        double v = ref1(-150.0 + 0.75 * j);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }

    // Monte Carlo agreement for the entangled components
    auto batch = sample_direct_batch(kThree, 200000, 53, false, 4);
    for (std::size_t comp : {std::size_t(1), std::size_t(2)}) {
        MarginalCdf ref(kThree, comp);
        std::vector<double> x;
        for (Eigen::Index r = 0; r < batch.beta.rows(); ++r)
            x.push_back(batch.beta(r, static_cast<Eigen::Index>(comp)));
        auto ks = stats::ks_test(x, [&](double b) { return ref(b); });
        INFO("component " << comp << " sup distance " << ks.statistic);
        CHECK(ks.statistic < 0.006);
    }

    CHECK_THROWS_AS(MarginalCdf(kThree, 3), DimensionMismatch);
}

TEST_CASE("holding the innermost component piles mass at the ends of the middle one") {
    auto d = sample_reject_d(kThree, 20000, 59);
    std::vector<int> bins(10, 0);
    for (Eigen::Index r = 0; r < d.beta.rows(); ++r) {
        double u = -d.beta(r, 1) / 150.0;
        int j = std::min(9, int(u * 10.0));
        ++bins[j];
    }
    int mid = std::min({bins[3], bins[4], bins[5], bins[6]});
    INFO("deciles " << bins[0] << ".." << mid << ".." << bins[9]);
    CHECK(bins[0] > 1.1 * mid);
    CHECK(bins[9] > 1.1 * mid);
}

TEST_CASE("same seed reproduces a batch, different seeds do not") {
    auto r1 = sample_reject_c(kThree, 2000, 9);
    auto r2 = sample_reject_c(kThree, 2000, 9);
    REQUIRE(r1.raw_draws == r2.raw_draws);
    REQUIRE(r1.attempts == r2.attempts);
    REQUIRE(r1.failed == r2.failed);
    REQUIRE((r1.beta - r2.beta).cwiseAbs().maxCoeff() == 0.0);

    auto d1 = sample_direct(kThree, 100, 9);
    auto d2 = sample_direct(kThree, 100, 10);
    CHECK(d1.beta.row(0) != d2.beta.row(0));
}

TEST_CASE("stats bookkeeping handles the degenerate cases") {
    auto empty = sample_direct(kThree, 0, 1);
    auto st = batch_stats(empty, kThree);
    CHECK(st.requested == 0);
    CHECK(st.accepted == 0);
    CHECK(std::isnan(st.success_rate));
    CHECK(std::isnan(st.fail_rate));
    CHECK(std::isnan(st.mean_attempts));
    for (Eigen::Index i = 0; i < st.component_mean.size(); ++i)
        CHECK(std::isnan(st.component_mean[i]));

    auto small = batch_stats(sample_reject_a(kThree, 50, 2), kThree);
    CHECK(small.mean_attempts >= 1.0);
    CHECK(small.fail_rate == 0.0);
    CHECK(small.component_mean.size() == 3);
}

TEST_CASE("method names round-trip and invalid requests throw") {
    for (Method m : {Method::reject_a, Method::reject_b, Method::reject_c, Method::reject_d,
                     Method::direct, Method::direct_batch})
        CHECK(method_from_name(method_name(m)) == m);
    CHECK_THROWS_AS(method_from_name("bogus"), UnsupportedMethod);

    TubeSet two({100.0, 150.0});
    CHECK_THROWS_AS(sample_reject_b(two, 10, 1), UnsupportedMethod);
    CHECK_THROWS_AS(sample_reject_d(two, 10, 1), UnsupportedMethod);
    CHECK_NOTHROW(sample_reject_a(two, 10, 1));

    CHECK_THROWS_AS(sample(kThree, Method::reject_a, 10, 1, true), UnsupportedMethod);
    CHECK_THROWS_AS(sample_rejection(kThree, 10, 1, Method::reject_a, 0), OutOfRangeInput);
    CHECK_THROWS_AS(sample_rejection(kThree, 10, 1, Method::direct), UnsupportedMethod);
}

TEST_CASE("the dispatch entry point routes every method") {
    for (Method m : {Method::reject_a, Method::reject_b, Method::reject_c, Method::reject_d,
                     Method::direct, Method::direct_batch}) {
        auto batch = sample(kThree, m, 200, 3);
        CHECK(batch.method == m);
        CHECK(batch.requested == 200);
        for (Eigen::Index r = 0; r < batch.beta.rows(); ++r) {
            Eigen::VectorXd row = batch.beta.row(r);
            REQUIRE(check_constraints(kThree, row, 1e-9).valid);
        }
    }
}
