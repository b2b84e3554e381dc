#pragma once

// Boundary estimation for planar point clouds. The estimator keeps every
// Delaunay triangle whose circumradius is at most a cutoff and returns the
// rim of the kept region. A cutoff is valid when the kept region covers all
// points, is connected through shared edges, has disk topology
// (V - E + F = 1) and a rim that closes into one simple cycle; the smallest
// valid cutoff gives the tightest single enclosing polygon, the largest
// circumradius gives the convex hull. The concavity knob in [0, 1]
// interpolates geometrically between those two radii, snapping up to the
// next valid cutoff when the interpolated one is not usable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include <betabox/delaunay.hpp>
#include <betabox/errors.hpp>

namespace betabox {

struct BoundaryEstimate {
    std::vector<Eigen::Vector2d> polygon;  // counterclockwise, closed implicitly
    double area = 0.0;
    double concavity = 0.0;
    double threshold_radius = 0.0;  // circumradius cutoff actually used
};

namespace detail {

inline std::uint64_t edge_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
           static_cast<std::uint32_t>(v);
}

struct EdgeState {
    int count = 0;
    int first_tri = -1;
    int from = -1, to = -1;  // direction in the first kept triangle
};

// Walks the kept region's rim. Returns true and fills polygon_ids when the
// rim is exactly one simple cycle.
inline bool walk_rim(const std::unordered_map<std::uint64_t, EdgeState>& edges,
                     std::vector<int>& polygon_ids) {
    std::unordered_map<int, int> next;
    std::size_t boundary_edges = 0;
    int start = std::numeric_limits<int>::max();
    for (const auto& [key, e] : edges) {
        if (e.count != 1) continue;
        ++boundary_edges;
        if (!next.emplace(e.from, e.to).second) return false;  // two rims meet here
        start = std::min(start, e.from);
    }
    if (boundary_edges < 3) return false;
    polygon_ids.clear();
    int cur = start;
    for (std::size_t step = 0; step < boundary_edges; ++step) {
        polygon_ids.push_back(cur);
        auto it = next.find(cur);
        if (it == next.end()) return false;
        cur = it->second;
    }
    return cur == start;  // consumed every edge and closed up
}

struct AlphaScanResult {
    std::vector<int> polygon_ids;
    double radius = 0.0;
    bool valid = false;
};

// Inserts triangles in ascending circumradius order and reports the first
// cutoff >= min_radius where the kept complex is a disk over all points.
// tris must be sorted by radius.
inline AlphaScanResult alpha_scan(const std::vector<Delaunay::Tri>& tris,
                                  std::size_t n_vertices, double min_radius) {
    std::vector<int> parent(tris.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };

    std::unordered_map<std::uint64_t, EdgeState> edges;
    std::vector<char> vertex_seen(n_vertices, 0);
    std::size_t covered = 0, e_count = 0, v_count = 0;
    std::size_t components = 0, kept = 0;

    AlphaScanResult result;
    std::size_t i = 0;
    while (i < tris.size()) {
        // absorb the whole group of equal radii before judging
        const double r = tris[i].radius;
        for (; i < tris.size() && tris[i].radius == r; ++i) {
            const auto& t = tris[i];
            ++kept;
            ++components;
            const int idx = static_cast<int>(i);
            const int vs[3] = {t.a, t.b, t.c};
            for (int v : vs) {
                if (!vertex_seen[static_cast<std::size_t>(v)]) {
                    vertex_seen[static_cast<std::size_t>(v)] = 1;
                    ++covered;
                    ++v_count;
                }
            }
            const int dir[3][2] = {{t.a, t.b}, {t.b, t.c}, {t.c, t.a}};
            for (const auto& d : dir) {
                auto& e = edges[edge_key(d[0], d[1])];
                if (e.count == 0) {
                    e.first_tri = idx;
                    e.from = d[0];
                    e.to = d[1];
                    ++e_count;
                } else {
                    const int ra = find(idx), rb = find(e.first_tri);
                    if (ra != rb) {
                        parent[static_cast<std::size_t>(ra)] = rb;
                        --components;
                    }
                }
                ++e.count;
            }
        }
        if (r < min_radius) continue;
        if (covered != n_vertices || components != 1) continue;
        if (v_count + kept != e_count + 1) continue;  // V - E + F != 1
        if (walk_rim(edges, result.polygon_ids)) {
            result.radius = r;
            result.valid = true;
            return result;
        }
    }
    return result;
}

}  // namespace detail

// Boundary of a triangulated cloud. pts and tris normally come from a
// Delaunay instance; the triangles may arrive in any order.
inline BoundaryEstimate alpha_boundary(const std::vector<Eigen::Vector2d>& pts,
                                       std::vector<Delaunay::Tri> tris, double concavity) {
    if (!(concavity >= 0.0 && concavity <= 1.0))
        throw OutOfRangeInput("concavity must lie in [0, 1]");
    if (pts.size() < 3 || tris.empty())
        throw DegenerateCloud("boundary needs at least three distinct, non-collinear points");

    // guarantee counterclockwise winding, the rim orientation depends on it
    for (auto& t : tris)
        if (detail::orient2d(pts[static_cast<std::size_t>(t.a)], pts[static_cast<std::size_t>(t.b)],
                             pts[static_cast<std::size_t>(t.c)]) < 0.0)
            std::swap(t.b, t.c);
    std::sort(tris.begin(), tris.end(),
              [](const Delaunay::Tri& l, const Delaunay::Tri& r) { return l.radius < r.radius; });

    const auto tightest = detail::alpha_scan(tris, pts.size(), 0.0);
    if (!tightest.valid)
        throw DegenerateCloud("no simple enclosing boundary exists for this cloud");
    const double r_min = tightest.radius;
    const double r_max = tris.back().radius;

    detail::AlphaScanResult chosen;
    if (concavity == 1.0 || r_min == r_max) {
        chosen = tightest;
    } else {
        double target = r_max;
        if (concavity > 0.0) {
            const double cap = 1e300;
            target = std::exp((1.0 - concavity) * std::log(std::min(r_max, cap)) +
                              concavity * std::log(std::min(r_min, cap)));
        }
        chosen = detail::alpha_scan(tris, pts.size(), target);
        if (!chosen.valid) chosen = tightest;  // only smaller cutoffs were valid
    }

    BoundaryEstimate out;
    out.concavity = concavity;
    out.threshold_radius = chosen.radius;
    out.polygon.reserve(chosen.polygon_ids.size());
    for (int id : chosen.polygon_ids) out.polygon.push_back(pts[static_cast<std::size_t>(id)]);
    double twice = 0.0;
    for (std::size_t k = 0; k < out.polygon.size(); ++k) {
        const auto& p = out.polygon[k];
        const auto& q = out.polygon[(k + 1) % out.polygon.size()];
        twice += p.x() * q.y() - q.x() * p.y();
    }
    out.area = 0.5 * std::abs(twice);
    return out;
}

// Boundary straight from a cloud: deduplicates, rejects degenerate input,
// triangulates in serpentine order and hands off to alpha_boundary.
inline BoundaryEstimate concave_boundary(const Eigen::MatrixX2d& cloud, double concavity) {
    if (!(concavity >= 0.0 && concavity <= 1.0))
        throw OutOfRangeInput("concavity must lie in [0, 1]");

    std::unordered_set<std::uint64_t> distinct;
    std::vector<Eigen::Index> unique_rows;
    auto fingerprint = [](double x, double y) {
        std::uint64_t hx, hy;
        const double nx = x + 0.0, ny = y + 0.0;  // fold -0.0 onto 0.0
        std::memcpy(&hx, &nx, 8);
        std::memcpy(&hy, &ny, 8);
        return hx * 0x9E3779B97F4A7C15ull ^ (hy + 0x7F4A7C15ull);
    };
    for (Eigen::Index r = 0; r < cloud.rows(); ++r)
        if (distinct.insert(fingerprint(cloud(r, 0), cloud(r, 1))).second)
            unique_rows.push_back(r);
    if (unique_rows.size() < 3)
        throw DegenerateCloud("boundary needs at least three distinct points");

    bool spread = false;
    const Eigen::Vector2d p0 = cloud.row(unique_rows[0]);
    const Eigen::Vector2d p1 = cloud.row(unique_rows[1]);
    for (std::size_t k = 2; k < unique_rows.size() && !spread; ++k) {
        const Eigen::Vector2d q = cloud.row(unique_rows[k]);
        spread = std::abs(detail::orient2d(p0, p1, q)) > detail::eps_orient(p0, p1, q);
    }
    if (!spread)
        throw DegenerateCloud("boundary needs non-collinear points");

    Delaunay d(cloud.col(0).minCoeff(), cloud.col(1).minCoeff(),
               cloud.col(0).maxCoeff(), cloud.col(1).maxCoeff());
    for (Eigen::Index r : snake_order(cloud))
        d.insert(cloud(r, 0), cloud(r, 1));
    auto tris = d.real_triangles();
    if (tris.empty())
        throw DegenerateCloud("triangulation collapsed, the cloud is effectively degenerate");
    return alpha_boundary(d.points(), std::move(tris), concavity);
}

}  // namespace betabox
