#pragma once

// Wall clock comparison of the six samplers.
//
// Timing noise on a shared machine is correlated over time, so the harness
// interleaves the methods instead of timing each one back to back: every
// round runs all six once, and a method's statistics come from its per round
// times. A drifting machine then biases all methods roughly equally, which
// is what a normalized factor needs. Two refinements on top of that: an
// untimed warmup pass absorbs first-touch costs (page faults, cold caches),
// and each round rotates its starting method so no method systematically
// inherits the same neighbour's cache and frequency state. The factor
// column divides by the Direct mean, so factor(Direct) is one by
// construction, rejection factors land well above one, and the vectorized
// batch lands below one. Rows also carry the median round time, which is
// the better statistic for ordering methods whose means sit within a few
// percent: a single descheduled round shifts a mean for good but leaves
// the median alone.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include <betabox/errors.hpp>
#include <betabox/sampling.hpp>
#include <betabox/tube_set.hpp>

namespace betabox {

struct BenchRow {
    Method method = Method::direct;
    std::string name;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double std_ms = 0.0;
    double factor = 0.0;  // mean / mean(Direct)
    double fail_rate = 0.0;
    double success_rate = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;  // rejection family first, then the direct pair
    std::uint64_t count = 0;
    int repeats = 0;
    std::uint64_t seed = 0;
    std::uint32_t max_attempts = 0;
};

inline BenchReport run_bench(const TubeSet& tubes, std::uint64_t count, int repeats,
                             std::uint64_t seed, std::uint32_t max_attempts = 1000) {
    if (repeats < 1) throw OutOfRangeInput("benchmark needs at least one repeat");
    if (count < 1) throw OutOfRangeInput("benchmark needs at least one sample per batch");

    constexpr std::array<Method, 6> methods = {Method::reject_a, Method::reject_b,
                                               Method::reject_c, Method::reject_d,
                                               Method::direct,   Method::direct_batch};
    std::array<std::vector<double>, methods.size()> times;
    std::array<SamplingStats, methods.size()> stats;

    // warmup pass, untimed; the batches double as the statistics source
    // since every timed round regenerates the identical output anyway
    for (std::size_t m = 0; m < methods.size(); ++m)
        stats[m] = batch_stats(sample(tubes, methods[m], count, seed, false, max_attempts), tubes);

    for (int round = 0; round < repeats; ++round) {
        for (std::size_t k = 0; k < methods.size(); ++k) {
            const std::size_t m = (k + static_cast<std::size_t>(round)) % methods.size();
            const auto start = std::chrono::steady_clock::now();
            const auto batch = sample(tubes, methods[m], count, seed, false, max_attempts);
            const auto stop = std::chrono::steady_clock::now();
            times[m].push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        }
    }

    BenchReport report;
    report.count = count;
    report.repeats = repeats;
    report.seed = seed;
    report.max_attempts = max_attempts;

    double direct_mean = 0.0;
    std::array<double, methods.size()> means{};
    for (std::size_t m = 0; m < methods.size(); ++m) {
        double sum = 0.0;
        for (double t : times[m]) sum += t;
        means[m] = sum / static_cast<double>(repeats);
        if (methods[m] == Method::direct) direct_mean = means[m];
    }

    for (std::size_t m = 0; m < methods.size(); ++m) {
        BenchRow row;
        row.method = methods[m];
        row.name = method_name(methods[m]);
        row.mean_ms = means[m];
        std::vector<double> sorted = times[m];
        std::sort(sorted.begin(), sorted.end());
        const std::size_t h = sorted.size() / 2;
        row.median_ms = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
        if (repeats > 1) {
            double ss = 0.0;
            for (double t : times[m]) ss += (t - means[m]) * (t - means[m]);
            row.std_ms = std::sqrt(ss / static_cast<double>(repeats - 1));
        }
        row.factor = means[m] / direct_mean;
        row.fail_rate = stats[m].fail_rate;
        row.success_rate = stats[m].success_rate;
        report.rows.push_back(row);
    }
    return report;
}

inline std::string format_bench_table(const BenchReport& report) {
    std::string out = "method        mean_ms  median_ms    std_ms    factor  fail_rate  success_rate\n";
    char line[160];
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%-12s %8.3f  %9.3f  %8.3f  %8.2f  %9.4f  %12.4f\n",
                      row.name.c_str(), row.mean_ms, row.median_ms, row.std_ms, row.factor,
                      row.fail_rate, row.success_rate);
        out += line;
    }
    return out;
}

inline nlohmann::ordered_json bench_json(const BenchReport& report) {
    nlohmann::ordered_json doc;
    doc["count"] = report.count;
    doc["repeats"] = report.repeats;
    doc["seed"] = report.seed;
    doc["max_attempts"] = report.max_attempts;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json entry;
        entry["method"] = row.name;
        entry["mean_ms"] = row.mean_ms;
        entry["median_ms"] = row.median_ms;
        entry["std_ms"] = row.std_ms;
        entry["factor"] = row.factor;
        entry["fail_rate"] = row.fail_rate;
        entry["success_rate"] = row.success_rate;
        doc["rows"].push_back(entry);
    }
    return doc;
}

}  // namespace betabox
