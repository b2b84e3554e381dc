#pragma once

// Joint-space samplers over the feasible translation region.
//
// Rejection methods draw candidate vectors componentwise on [-L_i, 0] and
// keep the feasible ones. Method A redraws everything; B, C and D hold one
// component fixed per requested sample (the outermost, middle and
// innermost respectively, defined for three tubes) and redraw the rest.
// Every attempt regenerates a full candidate through the same kernel and
// then reinstates the held component, so the per-attempt cost is uniform
// across methods and matches how the approach is usually benchmarked.
//
// The direct methods map uniforms through the disentangling transform,
// beta = M u, so every draw is feasible. sample_direct_batch produces
// bit-identical output to sample_direct for the same seed because both
// read the same draw addresses (stream 0, slot k*N + i for sample k,
// component i); the batch variant just evaluates them as one bulk fill
// plus one matrix product, optionally sharded across threads.
//
// Rejection streams are per sample (stream 1 + k): slot 0 holds the pinned
// draw where applicable, attempt a covers the next N slots. A sample's
// draws therefore never depend on its neighbours' attempt counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include <betabox/errors.hpp>
#include <betabox/rng.hpp>
#include <betabox/transform.hpp>
#include <betabox/tube_set.hpp>

namespace betabox {

enum class Method { reject_a, reject_b, reject_c, reject_d, direct, direct_batch };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::reject_a: return "reject_a";
        case Method::reject_b: return "reject_b";
        case Method::reject_c: return "reject_c";
        case Method::reject_d: return "reject_d";
        case Method::direct: return "direct";
        case Method::direct_batch: return "direct_batch";
    }
    return "?";
}

inline Method method_from_name(const std::string& name) {
    for (Method m : {Method::reject_a, Method::reject_b, Method::reject_c, Method::reject_d,
                     Method::direct, Method::direct_batch})
        if (name == method_name(m))
            return m;
    throw UnsupportedMethod("unknown sampling method '" + name + "'");
}

struct SampleBatch {
    Method method = Method::direct;
    std::uint64_t seed = 0;
    bool sqrt_transform = false;
    std::uint32_t max_attempts = 1;
    std::uint64_t requested = 0;
    std::uint64_t raw_draws = 0;            // candidate vectors generated
    Eigen::MatrixXd beta;                   // accepted samples, one row each
    std::vector<std::uint32_t> attempts;    // per requested sample, 1..max_attempts
    std::vector<std::uint8_t> failed;       // per requested sample

    std::uint64_t accepted() const { return static_cast<std::uint64_t>(beta.rows()); }
    std::uint64_t failures() const {
        std::uint64_t f = 0;
        for (auto b : failed) f += b;
        return f;
    }
};

namespace detail {

// Allocation-free feasibility test, the hot path of the rejection loop.
// Evaluated without data-dependent branches: an early exit would let the
// branch predictor lock onto the held component of the pinning methods,
// whose per-attempt check outcomes are far more regular within a sample
// than the fully redrawn ones. That artefact is worth a couple of percent,
// enough to reorder methods whose honest costs sit closer than that.
inline bool feasible(const std::vector<double>& len, const double* beta) {
    double prev_beta = 0.0, prev_deployed = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < len.size(); ++i) {
        double deployed = len[i] + beta[i];
        ok &= (beta[i] <= prev_beta) & (deployed >= prev_deployed);
        prev_beta = beta[i];
        prev_deployed = deployed;
    }
    return ok;
}

inline int pinned_index(Method m) {
    switch (m) {
        case Method::reject_b: return 0;
        case Method::reject_c: return 1;
        case Method::reject_d: return 2;
        default: return -1;
    }
}

// Shared by the scalar and batch direct paths. Keeping the accumulation
// order in one place is what makes their outputs bit-identical; Eigen's
// matrix product kernels are free to reassociate, this loop is not.
inline void lower_tri_apply(const Eigen::MatrixXd& m, const double* u, double* out) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j <= i; ++j)
            acc += m(i, j) * u[j];
        out[i] = acc;
    }
}

}  // namespace detail

// Kept out of line and unclonable on purpose. Constant propagation would
// otherwise hand every method its own specialized copy of this loop, and
// copies land on different instruction alignments, which skews wall clock
// comparisons between methods by a few percent in either direction. The
// benchmark tells methods apart by margins of that same order, so all four
// must execute one shared code path and differ only in the work they do.
#if defined(__GNUC__) && !defined(__clang__)
__attribute__((noinline, noclone))
#endif
inline SampleBatch
sample_rejection(const TubeSet& tubes, std::uint64_t count, std::uint64_t seed, Method method,
                 std::uint32_t max_attempts = 1000) {
    const int pin = detail::pinned_index(method);
    if (pin < 0 && method != Method::reject_a)
        throw UnsupportedMethod(std::string(method_name(method)) + " is not a rejection method");
    if (pin >= 0 && tubes.size() != 3)
        throw UnsupportedMethod(std::string(method_name(method)) + " holds a fixed component and is defined for exactly three tubes");
    if (max_attempts == 0)
        throw OutOfRangeInput("max_attempts must be at least 1");

    const auto& len = tubes.lengths();
    const auto n = static_cast<Eigen::Index>(tubes.size());

    SampleBatch batch;
    batch.method = method;
    batch.seed = seed;
    batch.max_attempts = max_attempts;
    batch.requested = count;
    batch.attempts.resize(count);
    batch.failed.assign(count, 0);

    // sized for the no-failure case, trimmed afterwards; for the pure and
    // outermost-held methods with a sane cap that trim is a no-op
    batch.beta.resize(static_cast<Eigen::Index>(count), n);
    Eigen::Index kept = 0;
    std::vector<double> cand(tubes.size());
    for (std::uint64_t k = 0; k < count; ++k) {
        rng::Stream stream(seed, rng::Domain::sampling, 1 + k);
        double held = 0.0;
        if (pin >= 0)
            held = -len[static_cast<std::size_t>(pin)] * stream.next();
        bool ok = false;
        std::uint32_t a = 0;
        while (a < max_attempts) {
            ++a;
            for (std::size_t i = 0; i < cand.size(); ++i)
                cand[i] = -len[i] * stream.next();
            if (pin >= 0)
                cand[static_cast<std::size_t>(pin)] = held;
            ++batch.raw_draws;
            if (detail::feasible(len, cand.data())) {
                ok = true;
                break;
            }
        }
        batch.attempts[k] = a;
        if (ok) {
            for (Eigen::Index i = 0; i < n; ++i)
                batch.beta(kept, i) = cand[static_cast<std::size_t>(i)];
            ++kept;
        } else {
            batch.failed[k] = 1;
        }
    }
    if (kept != batch.beta.rows())
        batch.beta.conservativeResize(kept, n);
    return batch;
}

inline SampleBatch sample_reject_a(const TubeSet& t, std::uint64_t count, std::uint64_t seed,
                                   std::uint32_t max_attempts = 1000) {
    return sample_rejection(t, count, seed, Method::reject_a, max_attempts);
}
inline SampleBatch sample_reject_b(const TubeSet& t, std::uint64_t count, std::uint64_t seed,
                                   std::uint32_t max_attempts = 1000) {
    return sample_rejection(t, count, seed, Method::reject_b, max_attempts);
}
inline SampleBatch sample_reject_c(const TubeSet& t, std::uint64_t count, std::uint64_t seed,
                                   std::uint32_t max_attempts = 1000) {
    return sample_rejection(t, count, seed, Method::reject_c, max_attempts);
}
inline SampleBatch sample_reject_d(const TubeSet& t, std::uint64_t count, std::uint64_t seed,
                                   std::uint32_t max_attempts = 1000) {
    return sample_rejection(t, count, seed, Method::reject_d, max_attempts);
}

inline SampleBatch sample_direct(const TubeSet& tubes, std::uint64_t count, std::uint64_t seed,
                                 bool sqrt_transform = false) {
    const BetaTransform t = build_transform(tubes);
    const auto n = t.size();

    SampleBatch batch;
    batch.method = Method::direct;
    batch.seed = seed;
    batch.sqrt_transform = sqrt_transform;
    batch.requested = count;
    batch.raw_draws = count;
    batch.attempts.assign(count, 1);
    batch.failed.assign(count, 0);
    batch.beta.resize(static_cast<Eigen::Index>(count), n);

    rng::Stream stream(seed, rng::Domain::sampling, 0);
    Eigen::VectorXd u(n), b(n);
    for (std::uint64_t k = 0; k < count; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double v = stream.next();
            u[i] = sqrt_transform ? std::sqrt(v) : v;
        }
        detail::lower_tri_apply(t.M, u.data(), b.data());
        batch.beta.row(static_cast<Eigen::Index>(k)) = b.transpose();
    }
    return batch;
}

inline SampleBatch sample_direct_batch(const TubeSet& tubes, std::uint64_t count, std::uint64_t seed,
                                       bool sqrt_transform = false, unsigned threads = 1) {
    const BetaTransform t = build_transform(tubes);
    const auto n = t.size();

    SampleBatch batch;
    batch.method = Method::direct_batch;
    batch.seed = seed;
    batch.sqrt_transform = sqrt_transform;
    batch.requested = count;
    batch.raw_draws = count;
    batch.attempts.assign(count, 1);
    batch.failed.assign(count, 0);

    batch.beta.resize(static_cast<Eigen::Index>(count), n);

    // Sample k occupies slots [k*n, (k+1)*n) of stream 0, so a shard owns
    // its own address range and the output is independent of how many
    // shards ran. Each shard streams draws through a small scratch block
    // sized in whole samples, transforms in place and scatters into the
    // column-major result.
    const std::size_t nu = tubes.size();
    std::vector<double*> col(nu);
    for (std::size_t i = 0; i < nu; ++i)
        col[i] = batch.beta.data() + i * count;

    auto fill_range = [&](std::uint64_t first, std::uint64_t last) {
        rng::Stream stream(seed, rng::Domain::sampling, 0, first * nu);
        const std::uint64_t group = std::max<std::uint64_t>(1, 2048 / nu);
        std::vector<double> buf(static_cast<std::size_t>(group) * nu);
        std::vector<double> b(nu);
        for (std::uint64_t k = first; k < last;) {
            const std::uint64_t take = std::min(group, last - k);
            stream.fill(buf.data(), static_cast<std::size_t>(take) * nu);
            if (sqrt_transform)
                for (std::size_t j = 0; j < take * nu; ++j)
                    buf[j] = std::sqrt(buf[j]);
            const double* u = buf.data();
            for (std::uint64_t s = 0; s < take; ++s, u += nu) {
                detail::lower_tri_apply(t.M, u, b.data());
                for (std::size_t i = 0; i < nu; ++i)
                    col[i][k + s] = b[i];
            }
            k += take;
        }
    };
    if (threads <= 1 || count < 4096) {
        fill_range(0, count);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (count + threads - 1) / threads;
        for (unsigned w = 0; w < threads; ++w) {
            std::uint64_t first = w * chunk, last = std::min<std::uint64_t>(count, first + chunk);
            if (first >= last) break;
            pool.emplace_back(fill_range, first, last);
        }
        for (auto& th : pool) th.join();
    }
    return batch;
}

inline SampleBatch sample(const TubeSet& tubes, Method method, std::uint64_t count,
                          std::uint64_t seed, bool sqrt_transform = false,
                          std::uint32_t max_attempts = 1000, unsigned threads = 1) {
    switch (method) {
        case Method::direct: return sample_direct(tubes, count, seed, sqrt_transform);
        case Method::direct_batch: return sample_direct_batch(tubes, count, seed, sqrt_transform, threads);
        default:
            if (sqrt_transform)
                throw UnsupportedMethod("the square root reshaping applies to the direct methods only");
            return sample_rejection(tubes, count, seed, method, max_attempts);
    }
}

// Acceptance probability of one raw rejection draw: |det M| over the box
// volume, which telescopes to prod(1 - L_{i-1} / L_i).
inline double theoretical_success_rate(const TubeSet& tubes) {
    const auto& len = tubes.lengths();
    double rate = 1.0;
    for (std::size_t i = 1; i < len.size(); ++i)
        rate *= 1.0 - len[i - 1] / len[i];
    return rate;
}

struct SamplingStats {
    std::uint64_t requested = 0;
    std::uint64_t accepted = 0;
    std::uint64_t failed = 0;
    std::uint64_t raw_draws = 0;
    double success_rate = 0.0;       // accepted / raw draws
    double fail_rate = 0.0;          // failed / accepted, the usual reporting convention
    double mean_attempts = 0.0;      // over all requested samples, failures count the cap
    double theoretical_rate = 0.0;   // for the rejection family on this tube set
    Eigen::VectorXd component_mean;  // of the accepted samples
};

inline SamplingStats batch_stats(const SampleBatch& batch, const TubeSet& tubes) {
    SamplingStats s;
    s.requested = batch.requested;
    s.accepted = batch.accepted();
    s.failed = batch.failures();
    s.raw_draws = batch.raw_draws;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.success_rate = batch.raw_draws ? double(s.accepted) / double(s.raw_draws) : nan;
    s.fail_rate = s.accepted ? double(s.failed) / double(s.accepted) : nan;
    double sum = 0.0;
    for (auto a : batch.attempts) sum += a;
    s.mean_attempts = batch.requested ? sum / double(batch.requested) : nan;
    s.theoretical_rate = theoretical_success_rate(tubes);
    s.component_mean = s.accepted ? Eigen::VectorXd(batch.beta.colwise().mean())
                                  : Eigen::VectorXd::Constant(static_cast<Eigen::Index>(tubes.size()), nan);
    return s;
}

// Exact-in-the-limit CDF of one component under the direct sampler.
// beta_i is a negated sum of independent uniforms with widths
// (L_1, L_2 - L_1, ..., L_i - L_{i-1}). Convolving with a box kernel of
// width w turns the CDF F into the sliding mean (1/w) int_{x-w}^{x} F, so
// the grid carries the CDF itself and each tube applies one exact
// integration pass over its piecewise linear interpolant. That sidesteps
// the smeared density step a node-sampled box kernel would introduce.
class MarginalCdf {
  public:
    MarginalCdf(const TubeSet& tubes, std::size_t component, std::size_t cells = 4096) {
        if (component >= tubes.size())
            throw DimensionMismatch("component " + std::to_string(component) + " out of range");
        const auto& len = tubes.lengths();
        width_ = len[component];
        const std::size_t g = cells + 1;
        const double h = width_ / double(cells);

        // CDF of the positive magnitude X, starting from uniform(0, L_1)
        cdf_.resize(g);
        for (std::size_t j = 0; j < g; ++j)
            cdf_[j] = std::min(j * h, len[0]) / len[0];
        std::vector<double> integral(g), next(g);
        for (std::size_t c = 1; c <= component; ++c) {
            const double w = len[c] - len[c - 1];
            integral[0] = 0.0;
            for (std::size_t j = 1; j < g; ++j)
                integral[j] = integral[j - 1] + 0.5 * h * (cdf_[j - 1] + cdf_[j]);
            for (std::size_t j = 0; j < g; ++j) {
                double x = j * h;
                next[j] = (eval_integral(integral, h, x) - eval_integral(integral, h, x - w)) / w;
            }
            cdf_.swap(next);
        }
        // guard against interpolation drift at the top end
        double total = cdf_.back();
        for (auto& v : cdf_) v /= total;
        step_ = h;
    }

    // P(beta_component <= b)
    double operator()(double b) const {
        double x = -b;  // magnitude
        if (x <= 0.0) return 1.0;
        if (x >= width_) return 0.0;
        double pos = x / step_;
        auto j = static_cast<std::size_t>(pos);
        double frac = pos - double(j);
        return 1.0 - (cdf_[j] * (1.0 - frac) + cdf_[j + 1] * frac);
    }

  private:
    // running integral of the piecewise linear CDF, off-node points included
    double eval_integral(const std::vector<double>& integral, double h, double x) const {
        if (x <= 0.0) return 0.0;
        double last = double(integral.size() - 1) * h;
        if (x >= last) return integral.back() + (x - last);  // CDF is 1 beyond the grid
        double pos = x / h;
        auto j = static_cast<std::size_t>(pos);
        double s = (pos - double(j)) * h;
        double slope = (cdf_[j + 1] - cdf_[j]) / h;
        return integral[j] + s * cdf_[j] + 0.5 * s * s * slope;
    }

    std::vector<double> cdf_;
    double step_ = 0.0;
    double width_ = 0.0;
};

}  // namespace betabox
