#pragma once

// Incremental planar Delaunay triangulation (Bowyer-Watson) built for the
// boundary estimator: points go in one at a time, so a growing cloud can be
// paused at checkpoints and triangulated prefixes read off without starting
// over. Point location walks from the most recently created triangle, which
// is fast both for randomly ordered insertions and for the serpentine bulk
// order produced by snake_order.
//
// Predicates are plain doubles with relative epsilon guards. That is enough
// for the sampled clouds this library triangulates; adversarially cocircular
// inputs may get a locally non-Delaunay but still valid triangulation, which
// the boundary scan tolerates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include <betabox/errors.hpp>

namespace betabox {

namespace detail {

// positive when (a, b, c) turn counterclockwise; |result| below the paired
// eps_orient bound should be treated as collinear
inline double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

inline double eps_orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                         const Eigen::Vector2d& c) {
    return 1e-13 * (std::abs(b.x() - a.x()) * std::abs(c.y() - a.y()) +
                    std::abs(b.y() - a.y()) * std::abs(c.x() - a.x()));
}

// positive when d lies strictly inside the circumcircle of the
// counterclockwise triangle (a, b, c); the error bound mirrors the
// determinant's term structure
inline bool in_circumcircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                            const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    const double det = adx * (bdy * cd2 - bd2 * cdy) - ady * (bdx * cd2 - bd2 * cdx) +
                       ad2 * (bdx * cdy - bdy * cdx);
    const double mag = std::abs(adx) * (std::abs(bdy) * cd2 + bd2 * std::abs(cdy)) +
                       std::abs(ady) * (std::abs(bdx) * cd2 + bd2 * std::abs(cdx)) +
                       ad2 * (std::abs(bdx) * std::abs(cdy) + std::abs(bdy) * std::abs(cdx));
    return det > 1e-13 * mag;
}

inline double circumradius(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                           const Eigen::Vector2d& c) {
    const Eigen::Vector2d ab = b - a, ac = c - a;
    const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    const double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
    const double ux = (ac.y() * ab2 - ab.y() * ac2) / d;
    const double uy = (ab.x() * ac2 - ac.x() * ab2) / d;
    return std::hypot(ux, uy);
}

}  // namespace detail

class Delaunay {
  public:
    // one triangle of the real (super-vertex free) triangulation; vertex ids
    // follow insertion order and the winding is counterclockwise
    struct Tri {
        int a, b, c;
        double radius;  // circumradius
    };

    // the box must contain every point that will ever be inserted
    Delaunay(double min_x, double min_y, double max_x, double max_y) {
        const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
        const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
        const double m = 32.0 * span;
        verts_.emplace_back(cx - 2.0 * m, cy - m);
        verts_.emplace_back(cx + 2.0 * m, cy - m);
        verts_.emplace_back(cx, cy + 2.0 * m);
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, 0, true});
        hint_ = 0;
    }

    // inserts a point and returns its vertex id; an exact duplicate of an
    // existing point is not inserted again and returns the original's id
    int insert(double x, double y) {
        const Eigen::Vector2d p(x, y);
        const int loc = locate(p);
        for (int v : tris_[static_cast<std::size_t>(loc)].v)
            if (verts_[static_cast<std::size_t>(v)] == p && v >= 3)
                return v - 3;

        // grow the cavity of triangles whose circumdisk swallows p
        ++epoch_;
        std::vector<int> bad{loc};
        tris_[static_cast<std::size_t>(loc)].seen = epoch_;
        for (std::size_t head = 0; head < bad.size(); ++head) {
            for (int nb : tris_[static_cast<std::size_t>(bad[head])].nbr) {
                auto* t = nb >= 0 ? &tris_[static_cast<std::size_t>(nb)] : nullptr;
                if (!t || t->seen == epoch_) continue;
                t->seen = epoch_;
                if (disk_contains_(*t, p)) {
                    t->in_cavity = true;
                    bad.push_back(nb);
                }
            }
        }
        tris_[static_cast<std::size_t>(loc)].in_cavity = true;

        // the cavity rim: edges from a cavity triangle to a surviving one
        struct Rim {
            int a, b, outer;
        };
        std::vector<Rim> rim;
        for (int bi : bad) {
            const auto& t = tris_[static_cast<std::size_t>(bi)];
            for (int e = 0; e < 3; ++e) {
                const int nb = t.nbr[static_cast<std::size_t>(e)];
                if (nb >= 0 && tris_[static_cast<std::size_t>(nb)].in_cavity) continue;
                rim.push_back({t.v[static_cast<std::size_t>((e + 1) % 3)],
                               t.v[static_cast<std::size_t>((e + 2) % 3)], nb});
            }
        }

        const int pid = static_cast<int>(verts_.size());
        verts_.push_back(p);
        for (int bi : bad) free_(bi);

        // fan p to the rim; edge (p, x) is shared by exactly two new
        // triangles, so a map keyed on x pairs them up
        std::unordered_map<int, std::pair<int, int>> half;  // endpoint -> (tri, edge)
        for (const auto& r : rim) {
            const int ti = alloc_({pid, r.a, r.b});
            auto& t = tris_[static_cast<std::size_t>(ti)];
            t.nbr[0] = r.outer;
            if (r.outer >= 0) {
                auto& o = tris_[static_cast<std::size_t>(r.outer)];
                for (int e = 0; e < 3; ++e) {
                    const int u = o.v[static_cast<std::size_t>((e + 1) % 3)];
                    const int w = o.v[static_cast<std::size_t>((e + 2) % 3)];
                    if ((u == r.a && w == r.b) || (u == r.b && w == r.a))
                        o.nbr[static_cast<std::size_t>(e)] = ti;
                }
            }
            link_(half, r.b, ti, 1);  // edge (b, p)
            link_(half, r.a, ti, 2);  // edge (p, a)
            hint_ = ti;
        }
        return pid - 3;
    }

    std::size_t vertex_count() const { return verts_.size() - 3; }

    const Eigen::Vector2d& point(int id) const { return verts_[static_cast<std::size_t>(id + 3)]; }

    std::vector<Eigen::Vector2d> points() const {
        return {verts_.begin() + 3, verts_.end()};
    }

    std::vector<Tri> real_triangles() const {
        std::vector<Tri> out;
        for (const auto& t : tris_) {
            if (!t.alive || t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
            const auto& a = verts_[static_cast<std::size_t>(t.v[0])];
            const auto& b = verts_[static_cast<std::size_t>(t.v[1])];
            const auto& c = verts_[static_cast<std::size_t>(t.v[2])];
            out.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3, detail::circumradius(a, b, c)});
        }
        return out;
    }

  private:
    struct Node {
        std::array<int, 3> v;    // counterclockwise
        std::array<int, 3> nbr;  // nbr[i] faces the edge opposite v[i]
        std::uint64_t seen = 0;
        bool alive = true;
        bool in_cavity = false;
    };

    // Cavity predicate with the super vertices treated as points at
    // infinity, so hull slivers of arbitrarily large circumradius still
    // resolve correctly. Scaling the super vertices outward, a circumdisk
    // through one of them tends to the half-plane beyond the triangle's real
    // edge (plus the open chord for collinear queries); through two of them
    // it tends to the half-plane beyond the line through the one real vertex
    // parallel to the super-to-super direction, which is what lets a cavity
    // bridge the fan around a hull corner. Sides are resolved by where the
    // super vertices themselves lie, not by stored vertex order.
    bool disk_contains_(const Node& t, const Eigen::Vector2d& p) const {
        int n_super = 0;
        std::array<int, 3> super{};
        std::array<int, 3> real{};
        int n_real = 0;
        for (int k = 0; k < 3; ++k) {
            const int v = t.v[static_cast<std::size_t>(k)];
            if (v < 3)
                super[static_cast<std::size_t>(n_super++)] = v;
            else
                real[static_cast<std::size_t>(n_real++)] = v;
        }
        if (n_super == 0)
            return detail::in_circumcircle(verts_[static_cast<std::size_t>(t.v[0])],
                                           verts_[static_cast<std::size_t>(t.v[1])],
                                           verts_[static_cast<std::size_t>(t.v[2])], p);
        if (n_super == 3) return true;
        if (n_super == 1) {
            const auto& a = verts_[static_cast<std::size_t>(real[0])];
            const auto& b = verts_[static_cast<std::size_t>(real[1])];
            const auto& s = verts_[static_cast<std::size_t>(super[0])];
            const double o = detail::orient2d(a, b, p);
            const double eps = detail::eps_orient(a, b, p);
            if (std::abs(o) <= eps) {
                const double along = (p - a).dot(b - a);
                return along > 0.0 && along < (b - a).squaredNorm();
            }
            return (o > 0.0) == (detail::orient2d(a, b, s) > 0.0);
        }
        const auto& a = verts_[static_cast<std::size_t>(real[0])];
        const auto& s0 = verts_[static_cast<std::size_t>(super[0])];
        const auto& s1 = verts_[static_cast<std::size_t>(super[1])];
        const Eigen::Vector2d b = a + (s1 - s0);
        const double o = detail::orient2d(a, b, p);
        if (std::abs(o) <= detail::eps_orient(a, b, p)) return false;
        return (o > 0.0) == (detail::orient2d(a, b, 0.5 * (s0 + s1)) > 0.0);
    }

    int locate(const Eigen::Vector2d& p) const {
        int cur = hint_, prev = -1;
        for (std::size_t guard = 0; guard < 4 * tris_.size() + 64; ++guard) {
            const auto& t = tris_[static_cast<std::size_t>(cur)];
            int next = -1;
            for (int e = 0; e < 3; ++e) {
                const int nb = t.nbr[static_cast<std::size_t>(e)];
                if (nb < 0 || nb == prev) continue;
                const auto& u = verts_[static_cast<std::size_t>(t.v[static_cast<std::size_t>((e + 1) % 3)])];
                const auto& w = verts_[static_cast<std::size_t>(t.v[static_cast<std::size_t>((e + 2) % 3)])];
                if (detail::orient2d(u, w, p) < -detail::eps_orient(u, w, p)) {
                    next = nb;
                    break;
                }
            }
            if (next < 0) return cur;
            prev = cur;
            cur = next;
        }
        // the walk cycled on a near-degenerate patch; scan instead
        for (std::size_t i = 0; i < tris_.size(); ++i) {
            const auto& t = tris_[i];
            if (!t.alive) continue;
            bool inside = true;
            for (int e = 0; e < 3 && inside; ++e) {
                const auto& u = verts_[static_cast<std::size_t>(t.v[static_cast<std::size_t>((e + 1) % 3)])];
                const auto& w = verts_[static_cast<std::size_t>(t.v[static_cast<std::size_t>((e + 2) % 3)])];
                inside = detail::orient2d(u, w, p) >= -detail::eps_orient(u, w, p);
            }
            if (inside) return static_cast<int>(i);
        }
        return hint_;
    }

    int alloc_(std::array<int, 3> v) {
        Node n;
        n.v = v;
        n.nbr = {-1, -1, -1};
        if (!free_list_.empty()) {
            const int i = free_list_.back();
            free_list_.pop_back();
            n.seen = tris_[static_cast<std::size_t>(i)].seen;
            tris_[static_cast<std::size_t>(i)] = n;
            return i;
        }
        tris_.push_back(n);
        return static_cast<int>(tris_.size()) - 1;
    }

    void free_(int i) {
        tris_[static_cast<std::size_t>(i)].alive = false;
        tris_[static_cast<std::size_t>(i)].in_cavity = false;
        free_list_.push_back(i);
    }

    void link_(std::unordered_map<int, std::pair<int, int>>& half, int endpoint, int tri, int edge) {
        auto it = half.find(endpoint);
        if (it == half.end()) {
            half.emplace(endpoint, std::make_pair(tri, edge));
            return;
        }
        tris_[static_cast<std::size_t>(tri)].nbr[static_cast<std::size_t>(edge)] = it->second.first;
        tris_[static_cast<std::size_t>(it->second.first)]
            .nbr[static_cast<std::size_t>(it->second.second)] = tri;
        half.erase(it);
    }

    std::vector<Eigen::Vector2d> verts_;
    std::vector<Node> tris_;
    std::vector<int> free_list_;
    std::uint64_t epoch_ = 0;
    int hint_ = 0;
};

// Serpentine bulk-insertion order: cells of a coarse grid walked
// boustrophedon, so consecutive insertions stay close and the locate walk
// stays short. Returns the permutation of row indices to insert.
inline std::vector<Eigen::Index> snake_order(const Eigen::MatrixX2d& pts) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(pts.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    if (pts.rows() < 2) return order;
    const double min_x = pts.col(0).minCoeff(), max_x = pts.col(0).maxCoeff();
    const double min_y = pts.col(1).minCoeff(), max_y = pts.col(1).maxCoeff();
    const double wx = std::max(max_x - min_x, 1e-300), wy = std::max(max_y - min_y, 1e-300);
    const int g = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(pts.rows()) / 4.0)));
    auto cell = [&](Eigen::Index r) {
        int cx = std::min(g - 1, static_cast<int>((pts(r, 0) - min_x) / wx * g));
        int cy = std::min(g - 1, static_cast<int>((pts(r, 1) - min_y) / wy * g));
        if (cy & 1) cx = g - 1 - cx;
        return cy * g + cx;
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return cell(l) < cell(r); });
    return order;
}

}  // namespace betabox
