#pragma once

// Workspace estimation from sampled tip positions. The rotationally
// symmetric 3d cloud collapses to (distance-to-axis, height) points, a
// concave boundary gives the area, and convergence curves plus pairwise
// closeness statistics quantify how evenly the samples fill it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include <betabox/boundary.hpp>
#include <betabox/errors.hpp>
#include <betabox/kinematics.hpp>
#include <betabox/rng.hpp>
#include <betabox/sampling.hpp>

namespace betabox {

// (x, y, z) -> (sqrt(x^2 + y^2), z). Rotational symmetry of the robot makes
// this projection lossless for area purposes.
inline Eigen::MatrixX2d lantern_project(const Eigen::MatrixX3d& points) {
    Eigen::MatrixX2d out(points.rows(), 2);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        out(i, 0) = std::hypot(points(i, 0), points(i, 1));
        out(i, 1) = points(i, 2);
    }
    return out;
}

// Shoelace area of a simple closed polygon (last vertex connects back to the
// first). Properly crossing edges are rejected; the check skips adjacent
// edge pairs, which share an endpoint by construction.
inline double polygon_area(const std::vector<Eigen::Vector2d>& polygon) {
    const std::size_t m = polygon.size();
    if (m < 3) throw DegenerateCloud("polygon needs at least three vertices");
    auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
    for (std::size_t i = 0; i < m; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % m];
        for (std::size_t j = i + 1; j < m; ++j) {
            const std::size_t jn = (j + 1) % m;
            if (j == i || jn == i || j == (i + 1) % m) continue;  // shares an endpoint
            const auto& c = polygon[j];
            const auto& d = polygon[jn];
            const int d1 = sgn(detail::orient2d(c, d, a));
            const int d2 = sgn(detail::orient2d(c, d, b));
            const int d3 = sgn(detail::orient2d(a, b, c));
            const int d4 = sgn(detail::orient2d(a, b, d));
            if (d1 * d2 < 0 && d3 * d4 < 0)
                throw SelfIntersecting("polygon edges cross");
        }
    }
    double twice = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& p = polygon[i];
        const auto& q = polygon[(i + 1) % m];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(twice);
}

struct ClosenessStats {
    double mean = 0.0;
    double stddev = 0.0;
    double median_of_medians = 0.0;
    std::size_t block = 0;
    std::uint64_t pairs = 0;
};

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    const std::size_t m = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(m / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (m % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Pairwise-distance statistics of a projected cloud. Mean and standard
// deviation stream over all pairs; the median is approximated as the median
// of per-block medians so no all-pairs array is ever materialized.
inline ClosenessStats closeness_stats(const Eigen::MatrixX2d& cloud, std::size_t block = 1000) {
    const auto n = static_cast<std::size_t>(cloud.rows());
    if (n < 2) throw OutOfRangeInput("closeness needs at least two points");
    if (block < 2) throw OutOfRangeInput("closeness block size must be at least two");

    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = cloud(static_cast<Eigen::Index>(i), 0);
        ys[i] = cloud(static_cast<Eigen::Index>(i), 1);
    }

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = xs[i], yi = ys[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = xs[j] - xi, dy = ys[j] - yi;
            const double d = std::sqrt(dx * dx + dy * dy);
            sum += d;
            sum_sq += d * d;
        }
    }

    ClosenessStats out;
    out.block = block;
    out.pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    out.mean = sum / static_cast<double>(out.pairs);
    const double var = sum_sq / static_cast<double>(out.pairs) - out.mean * out.mean;
    out.stddev = std::sqrt(std::max(var, 0.0));

    std::vector<double> medians;
    std::vector<double> dists;
    for (std::size_t lo = 0; lo < n; lo += block) {
        const std::size_t hi = std::min(lo + block, n);
        if (hi - lo < 2) continue;  // a trailing singleton has no pairs
        dists.clear();
        for (std::size_t i = lo; i < hi; ++i)
            for (std::size_t j = i + 1; j < hi; ++j) {
                const double dx = xs[j] - xs[i], dy = ys[j] - ys[i];
                dists.push_back(std::sqrt(dx * dx + dy * dy));
            }
        medians.push_back(detail::median_inplace(dists));
    }
    out.median_of_medians = detail::median_inplace(medians);
    return out;
}

struct ConvergenceCurve {
    std::vector<std::uint64_t> counts;
    std::vector<double> median, low, high;  // area as a fraction of the full-cloud area
    double full_area = 0.0;
};

// Boundary area of growing prefixes under several shufflings of the cloud.
// Each permutation reuses one incremental triangulation, pausing at the
// requested counts; areas are normalized to the full cloud's area, so the
// curve approaches 1 and may overshoot it. A degenerate prefix (or cloud)
// contributes area 0.
inline ConvergenceCurve convergence_curve(const Eigen::MatrixX2d& cloud,
                                          std::vector<std::uint64_t> counts, double concavity,
                                          std::uint64_t seed, int permutations = 10) {
    const auto n = static_cast<std::uint64_t>(cloud.rows());
    if (permutations < 1) throw OutOfRangeInput("need at least one permutation");
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    if (counts.empty() || counts.front() < 3 || counts.back() > n)
        throw OutOfRangeInput("prefix counts must lie in [3, cloud size]");

    ConvergenceCurve curve;
    curve.counts = counts;
    try {
        curve.full_area = concave_boundary(cloud, concavity).area;
    } catch (const DegenerateCloud&) {
        curve.full_area = 0.0;
    }

    const double xmin = cloud.col(0).minCoeff(), xmax = cloud.col(0).maxCoeff();
    const double ymin = cloud.col(1).minCoeff(), ymax = cloud.col(1).maxCoeff();

    // per-count area across permutations, filled column by column
    std::vector<std::vector<double>> areas(counts.size(),
                                           std::vector<double>(static_cast<std::size_t>(permutations)));
    std::vector<std::uint64_t> order(n);
    for (int p = 0; p < permutations; ++p) {
        std::iota(order.begin(), order.end(), std::uint64_t{0});
        rng::Stream shuffle(seed, rng::Domain::permutations, static_cast<std::uint64_t>(p));
        for (std::uint64_t i = n - 1; i > 0; --i) {
            const auto r = std::min<std::uint64_t>(
                static_cast<std::uint64_t>(shuffle.next() * static_cast<double>(i + 1)), i);
            std::swap(order[i], order[r]);
        }

        Delaunay d(xmin, ymin, xmax, ymax);
        std::uint64_t inserted = 0;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            for (; inserted < counts[c]; ++inserted)
                d.insert(cloud(static_cast<Eigen::Index>(order[inserted]), 0),
                         cloud(static_cast<Eigen::Index>(order[inserted]), 1));
            double area = 0.0;
            try {
                area = alpha_boundary(d.points(), d.real_triangles(), concavity).area;
            } catch (const DegenerateCloud&) {
            }
            areas[c][static_cast<std::size_t>(p)] = area;
        }
    }

    for (auto& per_count : areas) {
        const double lo = *std::min_element(per_count.begin(), per_count.end());
        const double hi = *std::max_element(per_count.begin(), per_count.end());
        const double med = detail::median_inplace(per_count);
        const double scale = curve.full_area > 0.0 ? curve.full_area : 1.0;
        curve.low.push_back(lo / scale);
        curve.median.push_back(med / scale);
        curve.high.push_back(hi / scale);
    }
    return curve;
}

// Smallest sample count whose median area reaches the given fraction of the
// full-cloud area.
inline std::uint64_t samples_to_fraction(const ConvergenceCurve& curve, double fraction) {
    for (std::size_t i = 0; i < curve.counts.size(); ++i)
        if (curve.median[i] >= fraction) return curve.counts[i];
    throw NoConvergence("curve never reaches the requested fraction");
}

// Full sampling-to-projection pipeline for a robot model: feasible joints via
// the box transform, independent axial rotations, tip positions, lantern
// projection.
inline Eigen::MatrixX2d robot_cloud(const CtcrModel& model, std::uint64_t count,
                                    std::uint64_t seed, bool sqrt_transform,
                                    unsigned threads = 1) {
    const auto batch = sample_direct_batch(model.tubes(), count, seed, sqrt_transform, threads);
    const auto n = static_cast<Eigen::Index>(model.size());
    rng::Stream rot(seed, rng::Domain::rotations, 0);
    Eigen::MatrixX2d out(static_cast<Eigen::Index>(count), 2);
    Configuration q;
    q.alpha.resize(n);
    q.beta.resize(n);
    for (std::uint64_t k = 0; k < count; ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            q.alpha[i] = 2.0 * std::numbers::pi * rot.next();
        q.beta = batch.beta.row(static_cast<Eigen::Index>(k));
        const Eigen::Vector3d tip = ctcr_tip(model, q);
        out(static_cast<Eigen::Index>(k), 0) = std::hypot(tip.x(), tip.y());
        out(static_cast<Eigen::Index>(k), 1) = tip.z();
    }
    return out;
}

}  // namespace betabox
