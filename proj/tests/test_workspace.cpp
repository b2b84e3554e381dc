#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <betabox/delaunay.hpp>
#include <betabox/boundary.hpp>
#include <betabox/kinematics.hpp>
#include <betabox/stats.hpp>
#include <betabox/workspace.hpp>

using namespace betabox;

namespace {

CtcrModel robot_a() {
    return CtcrModel(TubeSet({100.0, 110.0, 200.0}),
                     {{40.0, 60.0, 0.012, 10.0},
                      {110.0, 0.0, 0.0, 3.0},
                      {200.0, 0.0, 0.0, 1.0}});
}

// Independent hull oracle: Andrew's monotone chain, counterclockwise output.
std::vector<Eigen::Vector2d> hull_oracle(const Eigen::MatrixX2d& cloud) {
    std::vector<Eigen::Vector2d> p(static_cast<std::size_t>(cloud.rows()));
    for (Eigen::Index i = 0; i < cloud.rows(); ++i) p[static_cast<std::size_t>(i)] = cloud.row(i);
    std::sort(p.begin(), p.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    p.erase(std::unique(p.begin(), p.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a == b; }),
            p.end());
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Eigen::Vector2d> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {  // lower chain
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    const std::size_t lower_end = k + 1;
    for (std::size_t i = p.size() - 1; i-- > 0;) {  // upper chain
        while (k >= lower_end && cross(h[k - 2], h[k - 1], p[i]) <= 0) --k;
        h[k++] = p[i];
    }
    h.resize(k - 1);
    return h;
}

double shoelace(const std::vector<Eigen::Vector2d>& poly) {
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        twice += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * std::abs(twice);
}

// Crossing-number containment oracle with an edge tolerance: points within
// tol of a boundary segment count as inside.
bool inside_or_on(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q, double tol) {
    bool in = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const Eigen::Vector2d ab = b - a;
        const double t = std::clamp(ab.squaredNorm() > 0.0 ? (q - a).dot(ab) / ab.squaredNorm() : 0.0,
                                    0.0, 1.0);
        if ((a + t * ab - q).norm() <= tol) return true;
        if ((a.y() > q.y()) != (b.y() > q.y())) {
            const double x = a.x() + (q.y() - a.y()) / (b.y() - a.y()) * ab.x();
            if (x > q.x()) in = !in;
        }
    }
    return in;
}

Eigen::MatrixX2d affine_stretch(const Eigen::MatrixX2d& cloud) {
    Eigen::Matrix2d a;
    a << 3.0, 1.2, -0.4, 0.8;
    return (cloud * a.transpose()).eval();
}

}  // namespace

TEST_CASE("lantern projection folds out the symmetry axis") {
    Eigen::MatrixX3d pts(2, 3);
    pts << 3.0, 4.0, 5.0, 0.0, 0.0, 7.0;
    const auto proj = lantern_project(pts);
    CHECK(proj(0, 0) == Catch::Approx(5.0).margin(1e-12));
    CHECK(proj(0, 1) == 5.0);
    CHECK(proj(1, 0) == 0.0);
    CHECK(proj(1, 1) == 7.0);

    rng::Stream s(77, rng::Domain::toys, 9);
    Eigen::MatrixX3d rand_pts(50, 3);
    for (Eigen::Index i = 0; i < rand_pts.rows(); ++i)
        for (Eigen::Index j = 0; j < 3; ++j) rand_pts(i, j) = 200.0 * (s.next() - 0.5);
    const auto rp = lantern_project(rand_pts);
    for (Eigen::Index i = 0; i < rand_pts.rows(); ++i) {
        REQUIRE(rp(i, 0) >= 0.0);
        const double lhs = rp(i, 0) * rp(i, 0) + rp(i, 1) * rp(i, 1);
        REQUIRE(lhs == Catch::Approx(rand_pts.row(i).squaredNorm()).epsilon(1e-12));
    }
}

TEST_CASE("polygon area follows the shoelace formula") {
    const std::vector<Eigen::Vector2d> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(polygon_area(square) == 1.0);
    const std::vector<Eigen::Vector2d> tri{{0, 0}, {1, 0}, {0, 1}};
    CHECK(polygon_area(tri) == 0.5);
    const std::vector<Eigen::Vector2d> reversed{{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    CHECK(polygon_area(reversed) == 1.0);

    const std::vector<Eigen::Vector2d> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    CHECK_THROWS_AS(polygon_area(bowtie), SelfIntersecting);
    const std::vector<Eigen::Vector2d> segment{{0, 0}, {1, 1}};
    CHECK_THROWS_AS(polygon_area(segment), DegenerateCloud);
}

TEST_CASE("triangulation has the empty-circumcircle property and tiles the hull") {
    const auto cloud = affine_stretch(toy_square_points(300, 41));
    Delaunay d(cloud.col(0).minCoeff(), cloud.col(1).minCoeff(),
               cloud.col(0).maxCoeff(), cloud.col(1).maxCoeff());
    for (Eigen::Index r : snake_order(cloud)) d.insert(cloud(r, 0), cloud(r, 1));
    REQUIRE(d.vertex_count() == 300);

    const auto tris = d.real_triangles();
    const auto pts = d.points();
    double tiled = 0.0;
    for (const auto& t : tris) {
        const auto& a = pts[static_cast<std::size_t>(t.a)];
        const auto& b = pts[static_cast<std::size_t>(t.b)];
        const auto& c = pts[static_cast<std::size_t>(t.c)];
        REQUIRE(detail::orient2d(a, b, c) > 0.0);
        tiled += 0.5 * detail::orient2d(a, b, c);
        for (int v = 0; v < 300; ++v) {
            if (v == t.a || v == t.b || v == t.c) continue;
            REQUIRE_FALSE(detail::in_circumcircle(a, b, c, pts[static_cast<std::size_t>(v)]));
        }
    }
    const double hull_area = shoelace(hull_oracle(cloud));
    REQUIRE(tiled == Catch::Approx(hull_area).epsilon(1e-9));

    SECTION("exact duplicates collapse onto the original vertex") {
        Delaunay dup(0, 0, 1, 1);
        const int first = dup.insert(0.25, 0.5);
        dup.insert(0.75, 0.25);
        dup.insert(0.5, 0.9);
        CHECK(dup.insert(0.25, 0.5) == first);
        CHECK(dup.vertex_count() == 3);
    }
}

TEST_CASE("boundary at zero concavity reproduces the convex hull") {
    const std::uint64_t seeds[] = {3, 17};
    for (const auto seed : seeds) {
        Eigen::MatrixX2d cloud = toy_square_points(400, seed);
        if (seed % 2 == 1) cloud = affine_stretch(cloud);
        const auto est = concave_boundary(cloud, 0.0);
        const double hull_area = shoelace(hull_oracle(cloud));
        REQUIRE(est.area == Catch::Approx(hull_area).epsilon(1e-9));
        REQUIRE(polygon_area(est.polygon) == Catch::Approx(est.area).epsilon(1e-12));
        for (Eigen::Index i = 0; i < cloud.rows(); ++i)
            REQUIRE(inside_or_on(est.polygon, cloud.row(i), 1e-9));
    }

    const auto disk = toy_disk_points(300, 11, true, 2.0);
    const auto est = concave_boundary(disk, 0.0);
    CHECK(est.area == Catch::Approx(shoelace(hull_oracle(disk))).epsilon(1e-9));
}

TEST_CASE("unit square corners anchor the boundary area") {
    Eigen::MatrixX2d corners(4, 2);
    corners << 0, 0, 1, 0, 1, 1, 0, 1;
    const auto just_corners = concave_boundary(corners, 0.0);
    CHECK(just_corners.area == Catch::Approx(1.0).margin(1e-12));
    CHECK(just_corners.polygon.size() == 4);

    const std::uint64_t fill_n = 10000;
    Eigen::MatrixX2d filled(fill_n + 4, 2);
    filled.topRows(4) = corners;
    filled.bottomRows(static_cast<Eigen::Index>(fill_n)) = toy_square_points(fill_n, 23);
    for (const double concavity : {0.0, 0.5, 1.0}) {
        const auto est = concave_boundary(filled, concavity);
        INFO("concavity " << concavity);
        CHECK(est.area == Catch::Approx(1.0).margin(0.02));
        for (Eigen::Index i = 0; i < filled.rows(); ++i)
            REQUIRE(inside_or_on(est.polygon, filled.row(i), 1e-9));
    }
}

TEST_CASE("concavity tightens the boundary monotonically") {
    // an L-shaped cloud: the hull adds a triangular flap of area 1/2 that
    // higher concavity should carve away
    const auto base = toy_square_points(4000, 29);
    std::vector<Eigen::Vector2d> keep;
    for (Eigen::Index i = 0; i < base.rows(); ++i) {
        const double x = 2.0 * base(i, 0), y = 2.0 * base(i, 1);
        if (x <= 1.0 || y <= 1.0) keep.push_back({x, y});
    }
    Eigen::MatrixX2d cloud(static_cast<Eigen::Index>(keep.size()), 2);
    for (std::size_t i = 0; i < keep.size(); ++i) cloud.row(static_cast<Eigen::Index>(i)) = keep[i];

    const double hull_area = shoelace(hull_oracle(cloud));
    double prev_area = std::numeric_limits<double>::infinity();
    double prev_radius = std::numeric_limits<double>::infinity();
    for (const double concavity : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const auto est = concave_boundary(cloud, concavity);
        INFO("concavity " << concavity);
        REQUIRE(est.area <= hull_area * (1.0 + 1e-12));
        REQUIRE(est.area <= prev_area * (1.0 + 1e-12));
        REQUIRE(est.threshold_radius <= prev_radius);
        REQUIRE(polygon_area(est.polygon) == Catch::Approx(est.area).epsilon(1e-12));
        for (Eigen::Index i = 0; i < cloud.rows(); ++i)
            REQUIRE(inside_or_on(est.polygon, cloud.row(i), 1e-9));
        prev_area = est.area;
        prev_radius = est.threshold_radius;
    }
    // the tight boundary should shed most of the hull's flap over the notch
    // while keeping the body of the L (exact region area 3, minus the small
    // nibble the boundary takes between boundary samples)
    const auto tight = concave_boundary(cloud, 1.0);
    CHECK(tight.area < hull_area - 0.25);
    CHECK(tight.area > 2.75);
}

TEST_CASE("degenerate clouds are rejected") {
    Eigen::MatrixX2d two(2, 2);
    two << 0, 0, 1, 1;
    CHECK_THROWS_AS(concave_boundary(two, 0.5), DegenerateCloud);

    Eigen::MatrixX2d collinear(5, 2);
    collinear << 0, 0, 1, 1, 2, 2, 3, 3, -1, -1;
    CHECK_THROWS_AS(concave_boundary(collinear, 0.5), DegenerateCloud);

    Eigen::MatrixX2d repeated(6, 2);
    repeated << 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 0, 0;
    CHECK_THROWS_AS(concave_boundary(repeated, 0.5), DegenerateCloud);

    Eigen::MatrixX2d fine(4, 2);
    fine << 0, 0, 1, 0, 0, 1, 1, 1;
    CHECK_THROWS_AS(concave_boundary(fine, -0.1), OutOfRangeInput);
    CHECK_THROWS_AS(concave_boundary(fine, 1.1), OutOfRangeInput);
}

TEST_CASE("closeness statistics match hand enumerations") {
    Eigen::MatrixX2d pair(2, 2);
    pair << 0, 0, 3, 4;
    const auto ps = closeness_stats(pair);
    CHECK(ps.mean == 5.0);
    CHECK(ps.median_of_medians == 5.0);
    CHECK(ps.stddev == 0.0);
    CHECK(ps.pairs == 1);

    Eigen::MatrixX2d collinear(3, 2);
    collinear << 0, 0, 1, 0, 2, 0;
    const auto cs = closeness_stats(collinear);
    CHECK(cs.mean == Catch::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(cs.stddev == Catch::Approx(std::sqrt(2.0 / 9.0)).epsilon(1e-12));
    CHECK(cs.median_of_medians == 1.0);

    Eigen::MatrixX2d one(1, 2);
    CHECK_THROWS_AS(closeness_stats(one), OutOfRangeInput);
    CHECK_THROWS_AS(closeness_stats(pair, 1), OutOfRangeInput);
}

TEST_CASE("closeness of the uniform square matches the known mean distance") {
    const auto cloud = toy_square_points(10000, 5);
    const auto stats = closeness_stats(cloud);
    // E|p-q| for the unit square is (2 + sqrt(2) + 5 asinh 1) / 15
    const double expected = (2.0 + std::sqrt(2.0) + 5.0 * std::asinh(1.0)) / 15.0;
    CHECK(stats.mean == Catch::Approx(expected).margin(0.01));
    CHECK(stats.pairs == 49995000ull);

    // blocked median stays close to the exact all-pairs median
    const auto small = toy_square_points(3000, 6);
    std::vector<double> all;
    all.reserve(3000 * 2999 / 2);
    for (Eigen::Index i = 0; i < small.rows(); ++i)
        for (Eigen::Index j = i + 1; j < small.rows(); ++j)
            all.push_back((small.row(i) - small.row(j)).norm());
    std::sort(all.begin(), all.end());
    const double exact = 0.5 * (all[all.size() / 2 - 1] + all[all.size() / 2]);
    const auto blocked = closeness_stats(small, 1000);
    CHECK(blocked.median_of_medians == Catch::Approx(exact).margin(0.01));
    CHECK(blocked.block == 1000);
}

TEST_CASE("convergence curve aggregates prefix areas") {
    Eigen::MatrixX2d cloud(604, 2);
    cloud.topRows(4) << 0, 0, 1, 0, 1, 1, 0, 1;
    cloud.bottomRows(600) = toy_square_points(600, 31);
    const std::vector<std::uint64_t> counts{10, 50, 150, 300, 604};

    const auto curve = convergence_curve(cloud, counts, 0.0, 7, 5);
    REQUIRE(curve.counts == counts);
    REQUIRE(curve.full_area == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t i = 0; i < counts.size(); ++i) {
        CHECK(curve.low[i] <= curve.median[i]);
        CHECK(curve.median[i] <= curve.high[i]);
        CHECK(curve.low[i] > 0.0);
    }
    // the full prefix is the whole cloud under any permutation
    CHECK(curve.median.back() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(curve.low.back() == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(samples_to_fraction(curve, 0.99) <= 604);
    CHECK(std::is_sorted(curve.median.begin(), curve.median.end()));

    SECTION("single permutation collapses the band") {
        const auto single = convergence_curve(cloud, counts, 0.0, 7, 1);
        for (std::size_t i = 0; i < counts.size(); ++i) {
            CHECK(single.low[i] == single.median[i]);
            CHECK(single.median[i] == single.high[i]);
        }
    }

    SECTION("identical points give zero areas throughout") {
        Eigen::MatrixX2d same = Eigen::MatrixX2d::Ones(40, 2);
        const auto flat = convergence_curve(same, {5, 20, 40}, 0.5, 3, 2);
        CHECK(flat.full_area == 0.0);
        for (const double m : flat.median) CHECK(m == 0.0);
        CHECK_THROWS_AS(samples_to_fraction(flat, 0.99), NoConvergence);
    }

    SECTION("out-of-range prefix counts are rejected") {
        CHECK_THROWS_AS(convergence_curve(cloud, {2, 10}, 0.0, 7, 2), OutOfRangeInput);
        CHECK_THROWS_AS(convergence_curve(cloud, {10, 9999}, 0.0, 7, 2), OutOfRangeInput);
        CHECK_THROWS_AS(convergence_curve(cloud, counts, 0.0, 7, 0), OutOfRangeInput);
    }
}

TEST_CASE("disk homogeneity responds to the area-faithful draw") {
    const std::uint64_t n = 10000;
    const double radius = 2.0;
    auto annulus_chi2 = [&](const Eigen::MatrixX2d& pts) {
        std::vector<double> observed(10, 0.0);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            const double r = std::hypot(pts(i, 0), pts(i, 1));
            const auto bin = std::min<std::size_t>(
                static_cast<std::size_t>(r * r / (radius * radius) * 10.0), 9);
            observed[bin] += 1.0;
        }
        const std::vector<double> expected(10, static_cast<double>(n) / 10.0);
        return stats::chi2_test(observed, expected);
    };

    const auto uniform = annulus_chi2(toy_disk_points(n, 13, true, radius));
    CHECK(uniform.p_value > 0.01);
    const auto crowded = annulus_chi2(toy_disk_points(n, 13, false, radius));
    CHECK(crowded.p_value < 0.001);
}

TEST_CASE("reshaped draws spread the planar arc workspace") {
    const std::uint64_t n = 2000;
    const auto with = toy_cc_points(n, 19, true);
    const auto without = toy_cc_points(n, 19, false);

    const auto close_with = closeness_stats(with);
    const auto close_without = closeness_stats(without);
    CHECK(close_with.mean < close_without.mean);

    const double area_with = concave_boundary(with, 1.0).area;
    const double area_without = concave_boundary(without, 1.0).area;
    CHECK(area_with <= area_without);
}

TEST_CASE("reshaped draws spread the robot workspace") {
    const std::uint64_t n = 1500;
    const auto model = robot_a();
    const auto with = robot_cloud(model, n, 37, true);
    const auto without = robot_cloud(model, n, 37, false);
    REQUIRE(with.rows() == static_cast<Eigen::Index>(n));
    CHECK(with.col(0).minCoeff() >= 0.0);

    CHECK(closeness_stats(with).mean < closeness_stats(without).mean);
    CHECK(concave_boundary(with, 1.0).area <= concave_boundary(without, 1.0).area);

    SECTION("cloud generation is deterministic in the seed") {
        const auto again = robot_cloud(model, n, 37, true);
        CHECK(again == with);
    }
}
