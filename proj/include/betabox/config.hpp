#pragma once

// Robot description files.
//
// Robots are user inputs, not library constants, so they live in small JSON
// documents with a version key. A document names the robot, lists its tubes
// outermost first (each with straight and curved section lengths, the curved
// section precurvature, a relative stiffness weight, and a deployment safety
// margin), gives one PI gain pair per tube, and carries the experiment
// defaults the command line falls back to when a flag is not passed.
//
// Parsing is strict: an unknown key anywhere is an error, reported with the
// path of the offending key. Loose files are the usual way config drift
// sneaks past review, and these documents are tiny enough that strictness
// costs nothing. Validation beyond shape checks is delegated to the library
// constructors so the rules live in one place; their errors are rethrown
// with the file path prepended.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include <betabox/control.hpp>
#include <betabox/errors.hpp>
#include <betabox/kinematics.hpp>
#include <betabox/tube_set.hpp>

namespace betabox {

struct TubeRecord {
    double length_straight = 0.0;
    double length_curved = 0.0;
    double precurvature = 0.0;
    double stiffness = 1.0;
    double margin = 0.0;
};

struct ExperimentDefaults {
    std::uint64_t seed = 12345;
    std::uint64_t sample_count = 1000;
    double tolerance = 1e-9;
};

struct RobotConfig {
    std::string name;
    std::vector<TubeRecord> tubes;
    Eigen::VectorXd kp;
    Eigen::VectorXd ki;
    ExperimentDefaults defaults;

    std::size_t size() const { return tubes.size(); }

    TubeSet tube_set() const {
        std::vector<double> lengths, margins;
        lengths.reserve(tubes.size());
        margins.reserve(tubes.size());
        for (const auto& t : tubes) {
            lengths.push_back(t.length_straight + t.length_curved);
            margins.push_back(t.margin);
        }
        return TubeSet(std::move(lengths), std::move(margins));
    }

    CtcrModel model() const {
        std::vector<TubeGeometry> geometry;
        geometry.reserve(tubes.size());
        for (const auto& t : tubes)
            geometry.push_back({t.length_straight, t.length_curved, t.precurvature, t.stiffness});
        return CtcrModel(tube_set(), std::move(geometry));
    }

    PiGains gains() const { return PiGains(kp, ki); }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::string& where,
                                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw InvalidConfiguration("unknown key \"" + where + item.key() + "\"");
    }
}

inline const nlohmann::json& require_key(const nlohmann::json& obj, const std::string& where,
                                         const char* key) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw InvalidConfiguration("missing key \"" + where + key + "\"");
    return *it;
}

inline double number_at(const nlohmann::json& obj, const std::string& where, const char* key) {
    const auto& value = require_key(obj, where, key);
    if (!value.is_number())
        throw InvalidConfiguration("key \"" + where + key + "\" must be a number");
    return value.get<double>();
}

inline Eigen::VectorXd number_list_at(const nlohmann::json& obj, const std::string& where,
                                      const char* key) {
    const auto& value = require_key(obj, where, key);
    if (!value.is_array() || value.empty())
        throw InvalidConfiguration("key \"" + where + key + "\" must be a nonempty array");
    Eigen::VectorXd out(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number())
            throw InvalidConfiguration("key \"" + where + key + "\" must hold numbers only");
        out[static_cast<Eigen::Index>(i)] = value[i].get<double>();
    }
    return out;
}

}  // namespace detail

inline RobotConfig parse_robot_config(const nlohmann::json& doc) {
    using detail::number_at;
    using detail::number_list_at;
    using detail::reject_unknown_keys;
    using detail::require_key;

    if (!doc.is_object()) throw InvalidConfiguration("document root must be an object");
    reject_unknown_keys(doc, "", {"schema_version", "name", "tubes", "gains", "defaults"});

    const auto& version = require_key(doc, "", "schema_version");
    if (!version.is_number_integer() || version.get<std::int64_t>() != 1)
        throw InvalidConfiguration("schema_version must be the integer 1");

    RobotConfig config;
    const auto& name = require_key(doc, "", "name");
    if (!name.is_string()) throw InvalidConfiguration("key \"name\" must be a string");
    config.name = name.get<std::string>();

    const auto& tubes = require_key(doc, "", "tubes");
    if (!tubes.is_array() || tubes.empty())
        throw InvalidConfiguration("key \"tubes\" must be a nonempty array");
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        const std::string where = "tubes[" + std::to_string(i) + "].";
        const auto& entry = tubes[i];
        if (!entry.is_object())
            throw InvalidConfiguration("tubes[" + std::to_string(i) + "] must be an object");
        reject_unknown_keys(entry, where,
                            {"length_straight", "length_curved", "precurvature", "stiffness",
                             "margin"});
        TubeRecord record;
        record.length_straight = number_at(entry, where, "length_straight");
        record.length_curved = number_at(entry, where, "length_curved");
        record.precurvature = number_at(entry, where, "precurvature");
        record.stiffness = number_at(entry, where, "stiffness");
        record.margin = number_at(entry, where, "margin");
        config.tubes.push_back(record);
    }

    const auto& gains = require_key(doc, "", "gains");
    if (!gains.is_object()) throw InvalidConfiguration("key \"gains\" must be an object");
    reject_unknown_keys(gains, "gains.", {"kp", "ki"});
    config.kp = number_list_at(gains, "gains.", "kp");
    config.ki = number_list_at(gains, "gains.", "ki");

    const auto& defaults = require_key(doc, "", "defaults");
    if (!defaults.is_object()) throw InvalidConfiguration("key \"defaults\" must be an object");
    reject_unknown_keys(defaults, "defaults.", {"seed", "sample_count", "tolerance"});
    const double seed = number_at(defaults, "defaults.", "seed");
    const double count = number_at(defaults, "defaults.", "sample_count");
    if (seed < 0.0 || seed != std::floor(seed))
        throw InvalidConfiguration("defaults.seed must be a nonnegative integer");
    if (count < 1.0 || count != std::floor(count))
        throw InvalidConfiguration("defaults.sample_count must be a positive integer");
    config.defaults.seed = static_cast<std::uint64_t>(seed);
    config.defaults.sample_count = static_cast<std::uint64_t>(count);
    config.defaults.tolerance = number_at(defaults, "defaults.", "tolerance");
    if (!(config.defaults.tolerance > 0.0))
        throw InvalidConfiguration("defaults.tolerance must be positive");

    if (config.kp.size() != static_cast<Eigen::Index>(config.tubes.size()))
        throw InvalidConfiguration("gains.kp needs one entry per tube");
    if (config.ki.size() != static_cast<Eigen::Index>(config.tubes.size()))
        throw InvalidConfiguration("gains.ki needs one entry per tube");
    return config;
}

inline RobotConfig load_robot_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfiguration(path + ": cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfiguration(path + ": " + e.what());
    }
    try {
        RobotConfig config = parse_robot_config(doc);
        // Touch the derived objects so a file that parses but violates the
        // library invariants is rejected at load time, not at first use.
        config.tube_set();
        config.model();
        config.gains();
        return config;
    } catch (const Error& e) {
        throw InvalidConfiguration(path + ": " + e.what());
    }
}

// A robot argument is either a literal path to a .json file or a short name
// looked up as robot_<name>.json in the config directory, which defaults to
// ./configs and can be moved with BETABOX_CONFIG_DIR.
inline std::string resolve_robot_path(const std::string& spec) {
    const std::string suffix = ".json";
    if (spec.size() > suffix.size() &&
        spec.compare(spec.size() - suffix.size(), suffix.size(), suffix) == 0)
        return spec;
    const char* dir = std::getenv("BETABOX_CONFIG_DIR");
    const std::string base = (dir != nullptr && *dir != '\0') ? dir : "configs";
    return base + "/robot_" + spec + ".json";
}

inline RobotConfig load_robot(const std::string& spec) {
    return load_robot_config(resolve_robot_path(spec));
}

}  // namespace betabox
