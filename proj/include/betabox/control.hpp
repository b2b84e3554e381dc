#pragma once

// PI-controlled translation joints as one LTI system, before and after the
// change of coordinates that turns the two inequality chains into a box.
//
// Each tube's motor is a first-order lag with unit time constant driven by
// a PI controller, so the closed loop per axis is
//
//   d/dt [beta_i; q_i] = [[-K_P,i - 1, K_I,i], [-1, 0]] [beta_i; q_i]
//                        + [K_P,i; 1] r_i,
//
// stacked over tubes into A = [[diag(-K_P-1), diag(K_I)], [-I, 0]],
// B = [diag(K_P); I], C = [I 0], D = 0. Conjugating both state blocks by
// the joint-space map M gives Ahat = blockdiag(M, M) A blockdiag(Minv, Minv)
// whose blocks have a closed form independent of the tube lengths: M is an
// all-ones lower triangle times a column scaling, and the scaling commutes
// with any diagonal it conjugates, so
//
//   (M diag(d) Minv)[i][j] = d_j - d_{j+1} below the diagonal, d_i on it.
//
// The sub-diagonal entries are gain differences, which is where the gain
// ordering conditions come from: K_P ascending and K_I descending keep the
// off-diagonal signs benign, anything else is flagged by the ordering check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <betabox/errors.hpp>
#include <betabox/transform.hpp>
#include <betabox/tube_set.hpp>

namespace betabox {

struct PiGains {
    Eigen::VectorXd kp;
    Eigen::VectorXd ki;

    PiGains(Eigen::VectorXd kp_in, Eigen::VectorXd ki_in)
        : kp(std::move(kp_in)), ki(std::move(ki_in)) {
        if (kp.size() != ki.size())
            throw DimensionMismatch("gain vectors: " + std::to_string(kp.size()) +
                                    " proportional vs " + std::to_string(ki.size()) +
                                    " integral entries");
        if (kp.size() < 1) throw DimensionMismatch("gain vectors are empty");
        for (Eigen::Index i = 0; i < kp.size(); ++i)
            if (!(kp[i] > 0.0) || !(ki[i] > 0.0))
                throw NonPositiveGain("gain " + std::to_string(i) + " is not positive (kp " +
                                      std::to_string(kp[i]) + ", ki " + std::to_string(ki[i]) +
                                      ")");
    }

    Eigen::Index size() const { return kp.size(); }
};

struct StateSpace {
    Eigen::MatrixXd A;  // 2N x 2N
    Eigen::MatrixXd B;  // 2N x N
    Eigen::MatrixXd C;  // N x 2N
    Eigen::MatrixXd D;  // N x N, always zero
    bool transformed = false;

    Eigen::Index tube_count() const { return B.cols(); }
};

inline StateSpace build_closed_loop(const PiGains& gains) {
    const Eigen::Index n = gains.size();
    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    ss.A.topLeftCorner(n, n).diagonal() = -gains.kp.array() - 1.0;
    ss.A.topRightCorner(n, n).diagonal() = gains.ki;
    ss.A.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    ss.B = Eigen::MatrixXd::Zero(2 * n, n);
    ss.B.topRows(n).diagonal() = gains.kp;
    ss.B.bottomRows(n) = Eigen::MatrixXd::Identity(n, n);
    ss.C = Eigen::MatrixXd::Zero(n, 2 * n);
    ss.C.leftCols(n) = Eigen::MatrixXd::Identity(n, n);
    ss.D = Eigen::MatrixXd::Zero(n, n);
    ss.transformed = false;
    return ss;
}

// M diag(d) Minv without touching M: d_i on the diagonal, d_j - d_{j+1}
// everywhere below it in column j. No tube length survives the conjugation.
inline Eigen::MatrixXd conjugated_diagonal(const Eigen::VectorXd& d) {
    const Eigen::Index n = d.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out(j, j) = d[j];
        for (Eigen::Index i = j + 1; i < n; ++i) out(i, j) = d[j] - d[j + 1];
    }
    return out;
}

inline StateSpace transform_state_space(const StateSpace& ss, const BetaTransform& t) {
    const Eigen::Index n = ss.tube_count();
    if (ss.transformed)
        throw DimensionMismatch("state space is already in transformed coordinates");
    if (t.size() != n)
        throw DimensionMismatch("transform size " + std::to_string(t.size()) + " for " +
                                std::to_string(n) + " tube state space");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    s.topLeftCorner(n, n) = t.M;
    s.bottomRightCorner(n, n) = t.M;
    Eigen::MatrixXd s_inv = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    s_inv.topLeftCorner(n, n) = t.M_inv;
    s_inv.bottomRightCorner(n, n) = t.M_inv;

    StateSpace out;
    out.A = s * ss.A * s_inv;
    out.B = s * ss.B * t.M_inv;
    out.C = ss.C;
    out.D = ss.D;
    out.transformed = true;
    return out;
}

// The three dense blocks of the transformed system, straight from the
// conjugation identity: top-left of Ahat from d = -K_P - 1, top-right from
// d = K_I, top block of Bhat from d = K_P. Everything else is I, -I or 0.
struct TransformedBlocks {
    Eigen::MatrixXd a_top_left;
    Eigen::MatrixXd a_top_right;
    Eigen::MatrixXd b_top;
};

inline TransformedBlocks closed_form_transformed_blocks(const PiGains& gains) {
    TransformedBlocks blocks;
    blocks.a_top_left = conjugated_diagonal(-gains.kp.array() - 1.0);
    blocks.a_top_right = conjugated_diagonal(gains.ki);
    blocks.b_top = conjugated_diagonal(gains.kp);
    return blocks;
}

// Ordering conditions on the gains: proportional gains may not decrease
// toward the inner tubes and integral gains may not increase, otherwise the
// sub-diagonals of the transformed blocks change sign and the loop turns
// non-minimum phase. Indices are 1-based positions i where the pair
// (i, i+1) breaks the rule; equality is allowed.
struct GainOrderingReport {
    std::vector<Eigen::Index> kp_violations;
    std::vector<Eigen::Index> ki_violations;

    bool pass() const { return kp_violations.empty() && ki_violations.empty(); }
};

inline GainOrderingReport gain_ordering_check(const PiGains& gains) {
    GainOrderingReport report;
    for (Eigen::Index i = 0; i + 1 < gains.size(); ++i) {
        if (gains.kp[i] > gains.kp[i + 1]) report.kp_violations.push_back(i + 1);
        if (gains.ki[i] < gains.ki[i + 1]) report.ki_violations.push_back(i + 1);
    }
    return report;
}

inline std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("eigenvalues of a " + std::to_string(a.rows()) + " x " +
                                std::to_string(a.cols()) + " matrix");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    if (solver.info() != Eigen::Success)
        throw NoConvergence("eigenvalue iteration did not converge");
    std::vector<std::complex<double>> eig(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) eig[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
    std::sort(eig.begin(), eig.end(), [](const std::complex<double>& x, const std::complex<double>& y) {
        return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
    });
    return eig;
}

// One simulated run on a fixed time grid. beta holds the constraint-checked
// output per step (already mapped back to joint coordinates and, when
// requested, saturated); violation_steps are the grid indices whose beta
// failed the chains.
struct Trajectory {
    Eigen::VectorXd time;
    Eigen::MatrixXd state;  // one row per step, 2N columns
    Eigen::MatrixXd beta;   // one row per step, N columns
    std::vector<std::uint64_t> violation_steps;
    double worst_violation = 0.0;  // mm, max over steps

    std::uint64_t violation_count() const {
        return static_cast<std::uint64_t>(violation_steps.size());
    }
};

// Exact zero-order-hold march of dx/dt = A x + B u: the top-left and
// top-right blocks of exp([A B; 0 0] dt) are the discrete pair. The
// reference enters the transformed system as M r so both coordinate
// systems integrate the same physical loop; outputs come back through
// Minv. With saturate_unit the checked output is M clamp01(Minv beta),
// the box-coordinate clamp that makes the chains impossible to violate.
inline Trajectory simulate(const StateSpace& ss,
                           const std::function<Eigen::VectorXd(double)>& reference, double dt,
                           double horizon, const Eigen::VectorXd& x0, bool saturate_unit,
                           const TubeSet& tubes, double norm_bound = 1e9) {
    const Eigen::Index n = ss.tube_count();
    if (!(dt > 0.0) || !(horizon >= dt))
        throw OutOfRangeInput("time step " + std::to_string(dt) + " and horizon " +
                              std::to_string(horizon) + " must satisfy 0 < dt <= horizon");
    if (x0.size() != 2 * n)
        throw DimensionMismatch("initial state: got " + std::to_string(x0.size()) +
                                " entries for a " + std::to_string(2 * n) + " state");
    if (static_cast<Eigen::Index>(tubes.size()) != n)
        throw DimensionMismatch("tube set size " + std::to_string(tubes.size()) + " for " +
                                std::to_string(n) + " tube state space");

    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    block.topLeftCorner(2 * n, 2 * n) = ss.A * dt;
    block.block(0, 2 * n, 2 * n, n) = ss.B * dt;
    const Eigen::MatrixXd discrete = block.exp();
    const Eigen::MatrixXd ad = discrete.topLeftCorner(2 * n, 2 * n);
    const Eigen::MatrixXd bd = discrete.block(0, 2 * n, 2 * n, n);

    const BetaTransform t = build_transform(tubes);
    const auto steps = static_cast<Eigen::Index>(std::floor(horizon / dt + 1e-9)) + 1;

    Trajectory traj;
    traj.time.resize(steps);
    traj.state.resize(steps, 2 * n);
    traj.beta.resize(steps, n);

    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k < steps; ++k) {
        const double now = static_cast<double>(k) * dt;
        if (!x.allFinite() || x.norm() > norm_bound)
            throw NumericalOverflow("state norm exceeded " + std::to_string(norm_bound) +
                                    " at t = " + std::to_string(now));
        traj.time[k] = now;
        traj.state.row(k) = x.transpose();

        Eigen::VectorXd beta = ss.transformed ? Eigen::VectorXd(t.M_inv * x.head(n)) : x.head(n);
        if (saturate_unit && ss.transformed) {
            Eigen::VectorXd u = t.M_inv * beta;
            beta = t.M * u.cwiseMax(0.0).cwiseMin(1.0);
        }
        traj.beta.row(k) = beta.transpose();

        const ConstraintReport report = check_constraints(tubes, beta);
        if (!report.valid) {
            traj.violation_steps.push_back(static_cast<std::uint64_t>(k));
            traj.worst_violation = std::max(traj.worst_violation, report.worst_violation);
        }

        if (k + 1 < steps) {
            Eigen::VectorXd r = reference(now);
            if (r.size() != n)
                throw DimensionMismatch("reference at t = " + std::to_string(now) + ": got " +
                                        std::to_string(r.size()) + " entries for " +
                                        std::to_string(n) + " tubes");
            if (ss.transformed) r = t.M * r;
            x = ad * x + bd * r;
        }
    }
    return traj;
}

}  // namespace betabox
