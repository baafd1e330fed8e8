#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lincons/matrix_io.hpp"
#include "lincons/switched.hpp"

namespace lincons {

/// Parsed simulation config (see schemas/simulation-config.schema.json).
/// Random choices carry explicit seeds, so loading is deterministic.
struct SimulationConfig {
    std::vector<std::string> subsystem_paths;

    std::optional<std::vector<std::vector<double>>> f_rows;  ///< inline consensus functional
    std::optional<std::string> f_path;                       ///< or a headerless matrix file

    struct ExplicitSegment {
        double duration;
        std::size_t subsystem;  // 0-based
    };
    std::vector<ExplicitSegment> segments;  ///< explicit schedule, empty when random
    bool random_schedule = false;
    std::uint64_t schedule_seed = 0;
    double dwell_lo = 0.1, dwell_hi = 2.0;
    double total_time = 20.0;

    std::optional<std::vector<double>> x0;
    std::optional<std::uint64_t> x0_seed;

    double sample_dt = 0.01;
};

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& message) {
    throw InputError("config: " + path + ": " + message);
}

inline double require_positive_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) config_fail(path, "must be a number");
    const double v = j.get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) config_fail(path, "must be a positive finite number");
    return v;
}

}  // namespace detail

inline SimulationConfig parse_simulation_config(const nlohmann::json& j) {
    using detail::config_fail;
    if (!j.is_object()) config_fail("$", "document must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "subsystems" && key != "F" && key != "schedule" && key != "x0" &&
            key != "sample_dt")
            config_fail(key, "unknown key");
    }

    SimulationConfig cfg;

    if (!j.contains("subsystems") || !j["subsystems"].is_array() || j["subsystems"].empty())
        config_fail("subsystems", "required non-empty array of matrix file paths");
    for (const auto& item : j["subsystems"]) {
        if (!item.is_string()) config_fail("subsystems", "entries must be file path strings");
        cfg.subsystem_paths.push_back(item.get<std::string>());
    }

    if (!j.contains("F")) config_fail("F", "required (inline rows or {\"file\": path})");
    const auto& f = j["F"];
    if (f.is_array()) {
        std::vector<std::vector<double>> rows;
        for (const auto& row : f) {
            if (!row.is_array() || row.empty()) config_fail("F", "must be an array of number rows");
            std::vector<double> values;
            for (const auto& v : row) {
                if (!v.is_number()) config_fail("F", "entries must be numbers");
                values.push_back(v.get<double>());
            }
            if (!rows.empty() && values.size() != rows.front().size())
                config_fail("F", "rows must have equal length");
            rows.push_back(std::move(values));
        }
        cfg.f_rows = std::move(rows);
    } else if (f.is_object() && f.contains("file") && f["file"].is_string() && f.size() == 1) {
        cfg.f_path = f["file"].get<std::string>();
    } else {
        config_fail("F", "must be inline rows or {\"file\": path}");
    }

    if (!j.contains("schedule") || !j["schedule"].is_object())
        config_fail("schedule", "required object with 'segments' or 'random'");
    const auto& sched = j["schedule"];
    if (sched.contains("segments") == sched.contains("random"))
        config_fail("schedule", "exactly one of 'segments' or 'random' is required");
    if (sched.contains("segments")) {
        if (!sched["segments"].is_array() || sched["segments"].empty())
            config_fail("schedule.segments", "must be a non-empty array");
        for (const auto& seg : sched["segments"]) {
            if (!seg.is_object() || !seg.contains("duration") || !seg.contains("subsystem"))
                config_fail("schedule.segments", "each segment needs 'duration' and 'subsystem'");
            const double d = detail::require_positive_number(seg["duration"],
                                                             "schedule.segments[].duration");
            if (!seg["subsystem"].is_number_integer() || seg["subsystem"].get<long>() < 1)
                config_fail("schedule.segments[].subsystem", "must be a 1-based integer index");
            cfg.segments.push_back(
                {d, static_cast<std::size_t>(seg["subsystem"].get<long>() - 1)});
        }
    } else {
        const auto& rnd = sched["random"];
        if (!rnd.is_object()) config_fail("schedule.random", "must be an object");
        cfg.random_schedule = true;
        if (!rnd.contains("seed") || !rnd["seed"].is_number_integer())
            config_fail("schedule.random.seed", "required integer");
        cfg.schedule_seed = rnd["seed"].get<std::uint64_t>();
        if (rnd.contains("dwell")) {
            if (!rnd["dwell"].is_array() || rnd["dwell"].size() != 2)
                config_fail("schedule.random.dwell", "must be [lo, hi]");
            cfg.dwell_lo = detail::require_positive_number(rnd["dwell"][0], "schedule.random.dwell[0]");
            cfg.dwell_hi = detail::require_positive_number(rnd["dwell"][1], "schedule.random.dwell[1]");
            if (cfg.dwell_hi < cfg.dwell_lo)
                config_fail("schedule.random.dwell", "needs lo <= hi");
        }
        if (rnd.contains("total_time"))
            cfg.total_time = detail::require_positive_number(rnd["total_time"],
                                                             "schedule.random.total_time");
    }

    if (!j.contains("x0")) config_fail("x0", "required (inline vector or {\"random\": {\"seed\": s}})");
    const auto& x0 = j["x0"];
    if (x0.is_array()) {
        std::vector<double> values;
        for (const auto& v : x0) {
            if (!v.is_number()) config_fail("x0", "entries must be numbers");
            values.push_back(v.get<double>());
        }
        if (values.empty()) config_fail("x0", "must not be empty");
        cfg.x0 = std::move(values);
    } else if (x0.is_object() && x0.contains("random") && x0["random"].is_object() &&
               x0["random"].contains("seed") && x0["random"]["seed"].is_number_integer()) {
        cfg.x0_seed = x0["random"]["seed"].get<std::uint64_t>();
    } else {
        config_fail("x0", "must be a number array or {\"random\": {\"seed\": s}}");
    }

    if (j.contains("sample_dt"))
        cfg.sample_dt = detail::require_positive_number(j["sample_dt"], "sample_dt");
    return cfg;
}

inline SimulationConfig parse_simulation_config(std::istream& in,
                                                const std::string& source = "<config>") {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config: " + source + ": " + e.what());
    }
    return parse_simulation_config(j);
}

/// Fully resolved simulation inputs: matrices loaded, seeds expanded.
struct SimulationSetup {
    SwitchedSystem system;
    SwitchingSignal signal;
    Vector x0;
    double sample_dt = 0.01;
};

inline SimulationSetup load_simulation(const SimulationConfig& cfg,
                                       const std::filesystem::path& base_dir) {
    SimulationSetup setup;
    for (const auto& rel : cfg.subsystem_paths) {
        std::filesystem::path p(rel);
        if (p.is_relative()) p = base_dir / p;
        setup.system.subsystems.push_back(read_matrix_file(p));
    }
    const Index n = setup.system.n(), m = setup.system.m();

    if (cfg.f_rows) {
        const auto& rows = *cfg.f_rows;
        Matrix F(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
        for (Index r = 0; r < F.rows(); ++r)
            for (Index c = 0; c < F.cols(); ++c)
                F(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        setup.system.F = std::move(F);
    } else {
        std::filesystem::path p(*cfg.f_path);
        if (p.is_relative()) p = base_dir / p;
        setup.system.F = read_plain_matrix(p);
    }
    if (setup.system.F.rows() != m || setup.system.F.cols() != n * m)
        throw InputError("config: F has order " + std::to_string(setup.system.F.rows()) + "x" +
                         std::to_string(setup.system.F.cols()) + ", expected " + std::to_string(m) +
                         "x" + std::to_string(n * m));
    setup.system.validate();

    if (cfg.random_schedule) {
        setup.signal = random_switching_signal(setup.system.subsystems.size(), cfg.total_time,
                                               cfg.dwell_lo, cfg.dwell_hi, cfg.schedule_seed);
    } else {
        for (const auto& seg : cfg.segments) setup.signal.segments.push_back({seg.duration, seg.subsystem});
    }
    setup.signal.validate(setup.system.subsystems.size());

    if (cfg.x0) {
        if (static_cast<Index>(cfg.x0->size()) != n * m)
            throw InputError("config: x0 has dimension " + std::to_string(cfg.x0->size()) +
                             ", expected " + std::to_string(n * m));
        setup.x0 = Eigen::Map<const Vector>(cfg.x0->data(), static_cast<Index>(cfg.x0->size()));
    } else {
        std::mt19937_64 rng(*cfg.x0_seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        setup.x0.resize(n * m);
        for (Index i = 0; i < setup.x0.size(); ++i) setup.x0(i) = normal(rng);
    }

    setup.sample_dt = cfg.sample_dt;
    return setup;
}

}  // namespace lincons
