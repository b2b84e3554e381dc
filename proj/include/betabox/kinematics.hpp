#pragma once

// Tip-position models feeding the workspace studies: synthetic planar toys,
// a single-segment planar constant curvature robot, and a nested-tube model
// under the dominating-stiffness simplification. The nested-tube model is
// torsionally rigid: between segment boundaries the backbone follows a
// circular arc whose curvature vector is the stiffness-weighted mean of the
// present tubes' precurvature vectors, rotated by their axial angles.
// Boundaries sit at deployed tube ends and at straight-to-curved
// transitions, so each segment has one closed-form arc transform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <betabox/errors.hpp>
#include <betabox/rng.hpp>
#include <betabox/transform.hpp>
#include <betabox/tube_set.hpp>

namespace betabox {

struct PlanarCcSegment {
    double length = 0.0;     // mm
    double curvature = 0.0;  // 1/mm, sign picks the bending side
};

namespace detail {

// In-plane offset and axial advance of a circular arc. Near zero curvature
// the closed form divides two vanishing quantities, so a short series in
// theta = kappa * ell takes over below 1e-6 and keeps full precision.
inline void arc_offsets(double kappa, double ell, double& x, double& z) {
    const double theta = kappa * ell;
    if (std::abs(theta) < 1e-6) {
        const double t2 = theta * theta;
        x = ell * theta * 0.5 * (1.0 - t2 / 12.0 + t2 * t2 / 360.0);
        z = ell * (1.0 - t2 / 6.0 + t2 * t2 / 120.0);
    } else {
        x = (1.0 - std::cos(theta)) / kappa;
        z = std::sin(theta) / kappa;
    }
}

}  // namespace detail

inline Eigen::Vector2d cc_planar_tip(const PlanarCcSegment& seg) {
    if (!(seg.length >= 0.0))
        throw OutOfRangeInput("segment length must be nonnegative");
    double x, z;
    detail::arc_offsets(seg.curvature, seg.length, x, z);
    return {x, z};
}

struct TubeGeometry {
    double straight = 0.0;      // mm, proximal section
    double curved = 0.0;        // mm, distal precurved section
    double precurvature = 0.0;  // 1/mm
    double stiffness = 1.0;     // relative bending weight
};

class CtcrModel {
  public:
    CtcrModel(TubeSet tubes, std::vector<TubeGeometry> geometry)
        : tubes_(std::move(tubes)), geometry_(std::move(geometry)) {
        if (geometry_.size() != tubes_.size())
            throw DimensionMismatch("one geometry record per tube required");
        for (std::size_t i = 0; i < geometry_.size(); ++i) {
            const auto& g = geometry_[i];
            if (g.straight < 0.0 || g.curved < 0.0 || g.precurvature < 0.0)
                throw InvalidConfiguration("tube sections and precurvature must be nonnegative");
            if (std::abs(g.straight + g.curved - tubes_.lengths()[i]) > 1e-9)
                throw InvalidConfiguration("straight plus curved must equal the tube length");
            if (!(g.stiffness > 0.0))
                throw InvalidConfiguration("stiffness weights must be positive");
        }
    }

    const TubeSet& tubes() const { return tubes_; }
    const std::vector<TubeGeometry>& geometry() const { return geometry_; }
    std::size_t size() const { return tubes_.size(); }

  private:
    TubeSet tubes_;
    std::vector<TubeGeometry> geometry_;
};

struct Configuration {
    Eigen::VectorXd alpha;  // rad
    Eigen::VectorXd beta;   // mm
};

inline Eigen::Vector3d ctcr_tip(const CtcrModel& model, const Configuration& q) {
    const auto n = static_cast<Eigen::Index>(model.size());
    if (q.alpha.size() != n || q.beta.size() != n)
        throw DimensionMismatch("configuration size does not match the model");
    if (!check_constraints(model.tubes(), q.beta, 1e-9).valid)
        throw InvalidConfiguration("translations violate the nesting constraints");

    // segment boundaries: deployed tube ends and curved-section starts;
    // anything at or below the base plate is hidden and contributes nothing
    const auto& len = model.tubes().lengths();
    std::vector<double> ends(model.size()), cstart(model.size());
    std::vector<double> bounds{0.0};
    for (std::size_t i = 0; i < model.size(); ++i) {
        ends[i] = len[i] + q.beta[static_cast<Eigen::Index>(i)];
        cstart[i] = ends[i] - model.geometry()[i].curved;
        if (ends[i] > 0.0) bounds.push_back(ends[i]);
        if (cstart[i] > 0.0 && cstart[i] < ends[i]) bounds.push_back(cstart[i]);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d p = Eigen::Vector3d::Zero();
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        const double s0 = bounds[b], s1 = bounds[b + 1];
        const double mid = 0.5 * (s0 + s1), ell = s1 - s0;

        // stiffness-weighted curvature over the tubes present here; tubes
        // that are straight in this segment still add restoring stiffness
        double w = 0.0, kx = 0.0, ky = 0.0;
        bool any = false;
        for (std::size_t i = 0; i < model.size(); ++i) {
            if (ends[i] < mid) continue;
            any = true;
            const auto& g = model.geometry()[i];
            w += g.stiffness;
            if (mid >= cstart[i]) {
                const double a = q.alpha[static_cast<Eigen::Index>(i)];
                kx += g.stiffness * g.precurvature * std::cos(a);
                ky += g.stiffness * g.precurvature * std::sin(a);
            }
        }
        if (!any) break;
        kx /= w;
        ky /= w;

        // arc in the plane spanned by the curvature direction and the local
        // axis: rotate the plane in, sweep the arc, rotate back
        const double km = std::hypot(kx, ky);
        const double phi = std::atan2(ky, kx);
        double ax, az;
        detail::arc_offsets(km, ell, ax, az);
        Eigen::Matrix3d plane(Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitZ()));
        Eigen::Matrix3d sweep(Eigen::AngleAxisd(km * ell, Eigen::Vector3d::UnitY()));
        p += R * (plane * Eigen::Vector3d(ax, 0.0, az));
        R = R * plane * sweep * plane.transpose();
    }
    return p;
}

// Planar test clouds. Point k consumes slots 2k and 2k+1 of its stream, so
// a cloud is a stable prefix of any larger cloud with the same seed. Each
// generator owns one stream of the toys domain.

inline Eigen::MatrixX2d toy_square_points(std::uint64_t count, std::uint64_t seed) {
    Eigen::MatrixX2d pts(static_cast<Eigen::Index>(count), 2);
    rng::Stream s(seed, rng::Domain::toys, 0);
    for (Eigen::Index k = 0; k < pts.rows(); ++k) {
        pts(k, 0) = s.next();
        pts(k, 1) = s.next();
    }
    return pts;
}

inline Eigen::MatrixX2d toy_disk_points(std::uint64_t count, std::uint64_t seed,
                                        bool sqrt_transform, double radius = 1.0) {
    if (!(radius > 0.0))
        throw OutOfRangeInput("disk radius must be positive");
    Eigen::MatrixX2d pts(static_cast<Eigen::Index>(count), 2);
    rng::Stream s(seed, rng::Domain::toys, 1);
    for (Eigen::Index k = 0; k < pts.rows(); ++k) {
        const double theta = 2.0 * std::numbers::pi * s.next();
        const double u = s.next();
        const double r = radius * (sqrt_transform ? std::sqrt(u) : u);
        pts(k, 0) = r * std::cos(theta);
        pts(k, 1) = r * std::sin(theta);
    }
    return pts;
}

// Single-segment constant curvature toy. The first draw is the retraction
// fraction (reshaped by the square root when asked), so the arc length is
// length * (1 - u); the second draw picks a symmetric curvature. The plane
// is folded onto x >= 0, mirroring the axial projection used for the
// spatial robots.
inline Eigen::MatrixX2d toy_cc_points(std::uint64_t count, std::uint64_t seed, bool sqrt_transform,
                                      double length = 100.0,
                                      double max_curvature = std::numbers::pi / 200.0) {
    if (!(length > 0.0) || !(max_curvature > 0.0))
        throw OutOfRangeInput("toy arc length and curvature bound must be positive");
    Eigen::MatrixX2d pts(static_cast<Eigen::Index>(count), 2);
    rng::Stream s(seed, rng::Domain::toys, 2);
    for (Eigen::Index k = 0; k < pts.rows(); ++k) {
        double u = s.next();
        if (sqrt_transform) u = std::sqrt(u);
        const double ell = length * (1.0 - u);
        const double kap = (2.0 * s.next() - 1.0) * max_curvature;
        double x, z;
        detail::arc_offsets(kap, ell, x, z);
        pts(k, 0) = std::abs(x);
        pts(k, 1) = z;
    }
    return pts;
}

}  // namespace betabox
