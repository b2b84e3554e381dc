#pragma once

// File emitters for the command line tools.
//
// CSV is the plotting contract: every file starts with a header row, numbers
// are written with %.17g so a round trip through text preserves the double
// exactly, and rows appear in a deterministic order. JSON documents use the
// order preserving variant of the parser so keys come out the way they were
// inserted, which keeps byte level diffs meaningful. Nothing here writes a
// timestamp; identical inputs must give identical files.

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include <betabox/control.hpp>
#include <betabox/sampling.hpp>
#include <betabox/workspace.hpp>

namespace betabox::io {

inline std::string g17(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

// One row per requested sample, in request order. Failed draws keep their
// attempt count and carry nan coordinates so row indices line up with the
// request even when the sampler gave up.
inline void write_samples_csv(const std::string& path, const SampleBatch& batch) {
    auto out = open_output(path);
    const auto n = batch.beta.cols();
    out << "sample_id";
    for (Eigen::Index j = 0; j < n; ++j) out << ",beta_" << (j + 1);
    out << ",attempts,failed\n";
    Eigen::Index accepted_row = 0;
    for (std::uint64_t k = 0; k < batch.requested; ++k) {
        out << k;
        const bool failed = batch.failed[k] != 0;
        for (Eigen::Index j = 0; j < n; ++j)
            out << ',' << (failed ? "nan" : g17(batch.beta(accepted_row, j)));
        if (!failed) ++accepted_row;
        out << ',' << batch.attempts[k] << ',' << (failed ? 1 : 0) << '\n';
    }
}

inline void write_points_csv(const std::string& path, const Eigen::MatrixX2d& points) {
    auto out = open_output(path);
    out << "r,z\n";
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        out << g17(points(i, 0)) << ',' << g17(points(i, 1)) << '\n';
}

inline void write_polygon_csv(const std::string& path,
                              const std::vector<Eigen::Vector2d>& polygon) {
    auto out = open_output(path);
    out << "r,z\n";
    for (const auto& vertex : polygon)
        out << g17(vertex.x()) << ',' << g17(vertex.y()) << '\n';
}

inline void write_curve_csv(const std::string& path, const ConvergenceCurve& curve) {
    auto out = open_output(path);
    out << "count,median,low,high\n";
    for (std::size_t i = 0; i < curve.counts.size(); ++i)
        out << curve.counts[i] << ',' << g17(curve.median[i]) << ',' << g17(curve.low[i]) << ','
            << g17(curve.high[i]) << '\n';
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_output(path);
    const auto n = traj.beta.cols();
    out << "t";
    for (Eigen::Index j = 0; j < n; ++j) out << ",beta_" << (j + 1);
    out << ",violation\n";
    std::size_t next_violation = 0;
    for (Eigen::Index k = 0; k < traj.time.size(); ++k) {
        bool violated = false;
        if (next_violation < traj.violation_steps.size() &&
            traj.violation_steps[next_violation] == static_cast<std::uint64_t>(k)) {
            violated = true;
            ++next_violation;
        }
        out << g17(traj.time[k]);
        for (Eigen::Index j = 0; j < n; ++j) out << ',' << g17(traj.beta(k, j));
        out << ',' << (violated ? 1 : 0) << '\n';
    }
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

inline nlohmann::ordered_json json_vector(const Eigen::VectorXd& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline nlohmann::ordered_json json_spectrum(const std::vector<std::complex<double>>& eigs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& z : eigs) {
        nlohmann::ordered_json pair;
        pair["re"] = z.real();
        pair["im"] = z.imag();
        arr.push_back(pair);
    }
    return arr;
}

}  // namespace betabox::io
