#pragma once

// Linear disentanglement of the translation joint space.
//
// The feasible translations of a nested tube set form a parallelepiped cut
// out by two inequality chains. The lower triangular map
//
//   M[i][0] = -L_1,   M[i][j] = L_j - L_{j+1}  (0 < j <= i, 0-based)
//
// sends the unit cube [0,1]^N onto exactly that region, beta = M u, so any
// box constrained u is a feasible beta and vice versa. Its determinant and
// inverse are closed forms: det M = (-1)^N L_1 prod(L_i - L_{i-1}), and the
// inverse is bidiagonal,
//
//   Minv[0][0] = -1/L_1
//   Minv[i][i] =  1/(L_{i-1} - L_i)
//   Minv[i][i-1] = 1/(L_i - L_{i-1})
//
// with 2N-1 structural nonzeros. Both are built directly here; numeric
// inversion appears only as an oracle in the tests.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include <betabox/errors.hpp>
#include <betabox/rng.hpp>
#include <betabox/tube_set.hpp>

namespace betabox {

struct BetaTransform {
    Eigen::MatrixXd M;          // unit cube -> feasible region
    Eigen::MatrixXd M_inv;      // closed-form bidiagonal inverse
    double determinant = 0.0;   // closed-form det(M)
    Eigen::VectorXd lengths;    // tube lengths the transform was built from

    Eigen::Index size() const { return M.rows(); }
};

inline BetaTransform build_transform(const TubeSet& tubes) {
    const auto n = static_cast<Eigen::Index>(tubes.size());
    const auto& len = tubes.lengths();

    BetaTransform t;
    t.M = Eigen::MatrixXd::Zero(n, n);
    t.M_inv = Eigen::MatrixXd::Zero(n, n);
    t.lengths = Eigen::Map<const Eigen::VectorXd>(len.data(), n);

    for (Eigen::Index i = 0; i < n; ++i) {
        t.M(i, 0) = -len[0];
        for (Eigen::Index j = 1; j <= i; ++j)
            t.M(i, j) = len[j - 1] - len[j];
    }

    t.M_inv(0, 0) = -1.0 / len[0];
    for (Eigen::Index i = 1; i < n; ++i) {
        t.M_inv(i, i) = 1.0 / (len[i - 1] - len[i]);
        t.M_inv(i, i - 1) = 1.0 / (len[i] - len[i - 1]);
    }

    double det = -len[0];
    for (std::size_t i = 1; i < tubes.size(); ++i)
        det *= -(len[i] - len[i - 1]);
    t.determinant = det;
    return t;
}

inline const Eigen::MatrixXd& inverse_transform(const BetaTransform& t) { return t.M_inv; }
inline double transform_determinant(const BetaTransform& t) { return t.determinant; }

namespace detail {
inline void require_size(const BetaTransform& t, const Eigen::VectorXd& v, const char* what) {
    if (v.size() != t.size())
        throw DimensionMismatch(std::string(what) + ": got " + std::to_string(v.size()) +
                                " entries for " + std::to_string(t.size()) + " tubes");
}
}  // namespace detail

// beta = M u for u in the closed unit cube.
inline Eigen::VectorXd unit_to_beta(const BetaTransform& t, const Eigen::VectorXd& u) {
    detail::require_size(t, u, "unit vector");
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (!(u[i] >= 0.0 && u[i] <= 1.0))
            throw OutOfRangeInput("unit coordinate " + std::to_string(i) + " = " +
                                  std::to_string(u[i]) + " outside [0, 1]");
    return t.M * u;
}

// u = Minv beta; rejects beta whose image leaves the unit cube.
inline Eigen::VectorXd beta_to_unit(const BetaTransform& t, const Eigen::VectorXd& beta,
                                    double tol = 1e-9) {
    detail::require_size(t, beta, "beta vector");
    Eigen::VectorXd u = t.M_inv * beta;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(u[i] >= -tol && u[i] <= 1.0 + tol))
            throw InvalidBeta("translation vector is outside the feasible region (unit coordinate " +
                              std::to_string(i) + " = " + std::to_string(u[i]) + ")");
        u[i] = std::min(1.0, std::max(0.0, u[i]));
    }
    return u;
}

// Symmetric-range variants on [-1, 1]^N: beta = M (s + 1)/2, so s = -1 maps
// to beta = 0 (fully deployed) and s = +1 to beta_i = -L_i (fully retracted).
inline Eigen::VectorXd sym_to_beta(const BetaTransform& t, const Eigen::VectorXd& s) {
    detail::require_size(t, s, "symmetric vector");
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (!(s[i] >= -1.0 && s[i] <= 1.0))
            throw OutOfRangeInput("symmetric coordinate " + std::to_string(i) + " = " +
                                  std::to_string(s[i]) + " outside [-1, 1]");
    return 0.5 * (t.M * s) + 0.5 * (t.M * Eigen::VectorXd::Ones(s.size()));
}

inline Eigen::VectorXd beta_to_sym(const BetaTransform& t, const Eigen::VectorXd& beta,
                                   double tol = 1e-9) {
    Eigen::VectorXd u = beta_to_unit(t, beta, tol);
    return 2.0 * u - Eigen::VectorXd::Ones(u.size());
}

// Feasibility report for one translation vector. Slack vectors carry one
// entry per chain link; a negative entry is a violated link. Entry i of
// slack_retraction is beta_{i-1} - beta_i (beta_0 = 0), entry i of
// slack_deployment is (L_i + beta_i) - (L_{i-1} + beta_{i-1}) with the
// zeroth link measuring L_1 + beta_1 against the front plate.
struct ConstraintReport {
    bool valid = false;
    double worst_violation = 0.0;  // max(0, -min slack), in mm
    Eigen::VectorXd slack_retraction;
    Eigen::VectorXd slack_deployment;
};

inline ConstraintReport check_constraints(const TubeSet& tubes, const Eigen::VectorXd& beta,
                                          double tol = 1e-9) {
    const auto n = static_cast<Eigen::Index>(tubes.size());
    if (beta.size() != n)
        throw DimensionMismatch("beta vector: got " + std::to_string(beta.size()) +
                                " entries for " + std::to_string(n) + " tubes");
    const auto& len = tubes.lengths();

    ConstraintReport r;
    r.slack_retraction.resize(n);
    r.slack_deployment.resize(n);
    double prev_beta = 0.0, prev_deployed = 0.0, min_slack = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double deployed = len[i] + beta[i];
        r.slack_retraction[i] = prev_beta - beta[i];
        r.slack_deployment[i] = deployed - prev_deployed;
        min_slack = std::min({min_slack, r.slack_retraction[i], r.slack_deployment[i]});
        prev_beta = beta[i];
        prev_deployed = deployed;
    }
    r.valid = min_slack >= -tol;
    r.worst_violation = std::max(0.0, -min_slack);
    return r;
}

// Outside-in recursion: beta_i = beta_{i-1} + (L_{i-1} - L_i) u_i. This is
// exactly beta = M u written one row at a time, so it can never leave the
// feasible region.
inline Eigen::VectorXd ascending_pattern(const TubeSet& tubes, const Eigen::VectorXd& u) {
    const auto n = static_cast<Eigen::Index>(tubes.size());
    if (u.size() != n)
        throw DimensionMismatch("unit vector: got " + std::to_string(u.size()) +
                                " entries for " + std::to_string(n) + " tubes");
    const auto& len = tubes.lengths();
    Eigen::VectorXd beta(n);
    double prev_beta = 0.0, prev_len = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        beta[i] = prev_beta + (prev_len - len[i]) * u[i];
        prev_beta = beta[i];
        prev_len = len[i];
    }
    return beta;
}

// Inside-out recursion: beta_i = beta_{i+1} + (L_{i+1} - L_i) u_i. The
// innermost entry anchors at -L_N u_N and each step walks back outward.
// Unlike the outside-in pattern this one can break the nesting chain (it
// only respects the deployed length chain), which is what the search below
// demonstrates.
inline Eigen::VectorXd descending_pattern(const TubeSet& tubes, const Eigen::VectorXd& u) {
    const auto n = static_cast<Eigen::Index>(tubes.size());
    const auto& len = tubes.lengths();
    Eigen::VectorXd beta(n);
    beta[n - 1] = -len[n - 1] * u[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i)
        beta[i] = beta[i + 1] + (len[i + 1] - len[i]) * u[i];
    return beta;
}

struct PatternCounterexample {
    Eigen::VectorXd u;
    Eigen::VectorXd beta;
    std::uint64_t draws = 0;  // how many unit vectors were tried
};

// Draws unit vectors until the inside-out pattern produces an infeasible
// translation vector. For two tubes that happens whenever
// u_N <= (L_N - L_{N-1}) / L_N * u_{N-1}, so failures are common and the
// search returns quickly; the budget exists for pathological tube sets.
inline PatternCounterexample descending_pattern_counterexample(const TubeSet& tubes,
                                                               std::uint64_t seed,
                                                               std::uint64_t budget = 1'000'000) {
    const auto n = static_cast<Eigen::Index>(tubes.size());
    if (n < 2)
        throw UnsupportedMethod("inside-out pattern needs at least two tubes");
    rng::Stream stream(seed, rng::Domain::search, 0);
    Eigen::VectorXd u(n);
    for (std::uint64_t draw = 1; draw <= budget; ++draw) {
        for (Eigen::Index i = 0; i < n; ++i)
            u[i] = stream.next();
        Eigen::VectorXd beta = descending_pattern(tubes, u);
        // The recursion keeps the deployed lengths ordered by construction;
        // what it can break is the nesting chain, so hunt for that.
        if (check_constraints(tubes, beta).slack_retraction.minCoeff() < 0.0)
            return {u, beta, draw};
    }
    throw SearchExhausted("no infeasible draw within " + std::to_string(budget) + " attempts");
}

}  // namespace betabox
