#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "swarm/error.hpp"
#include "swarm/sim_engine.hpp"

namespace swarm {

/// Column names in file order:
/// t, drone<i>_x, drone<i>_y, drone<i>_role (per drone, ascending id),
/// flag_obs, d_rms, e_tps, leader_id, dist_<i>_<j> (i > j, i then j ascending),
/// energy_total.
inline std::vector<std::string> trace_columns(const std::vector<int>& ids) {
    std::vector<std::string> cols{"t"};
    for (int id : ids) {
        const std::string p = "drone" + std::to_string(id);
        cols.push_back(p + "_x");
        cols.push_back(p + "_y");
        cols.push_back(p + "_role");
    }
    for (const char* c : {"flag_obs", "d_rms", "e_tps", "leader_id"}) cols.emplace_back(c);
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) cols.push_back("dist_" + std::to_string(ids[i]) + "_" + std::to_string(ids[j]));
    cols.emplace_back("energy_total");
    return cols;
}

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

}  // namespace detail

inline void write_trace_csv(std::ostream& out, const RunResult& r) {
    const auto cols = trace_columns(r.ids);
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (const TickRecord& rec : r.trace) {
        out << detail::fmt(rec.t);
        for (const DroneRecord& d : rec.drones) {
            out << ',' << detail::fmt(d.position.x()) << ',' << detail::fmt(d.position.y()) << ','
                << (d.role == Role::Leader ? "leader" : "follower");
        }
        out << ',' << (rec.flag_obs ? 1 : 0) << ',' << detail::fmt(rec.d_rms) << ',' << detail::fmt(rec.e_tps) << ','
            << rec.leader_id;
        for (double d : rec.pair_distances) out << ',' << detail::fmt(d);
        out << ',' << rec.energy_total << '\n';
    }
}

inline nlohmann::json summary_json(const RunResult& r) {
    const Summary s = metrics(r);
    nlohmann::json j;
    j["mode"] = to_string(r.mode);
    j["outcome"] = s.outcome;
    j["mission_time"] = s.mission_time;
    j["reformation_time"] = s.reformation_time ? nlohmann::json(*s.reformation_time) : nlohmann::json(nullptr);
    j["detection_time"] = r.detection_time ? nlohmann::json(*r.detection_time) : nlohmann::json(nullptr);
    j["avoidance_end_time"] = r.avoidance_end_time ? nlohmann::json(*r.avoidance_end_time) : nlohmann::json(nullptr);
    j["peak_d_rms"] = s.peak_d_rms;
    j["peak_e_tps"] = s.peak_e_tps;
    j["total_energy"] = s.total_energy;
    j["flight_distance"] = s.flight_distance;
    j["min_separation"] = std::isfinite(s.min_separation) ? nlohmann::json(s.min_separation) : nlohmann::json(nullptr);
    j["min_obstacle_clearance"] = std::isfinite(s.min_obstacle_clearance) ? nlohmann::json(s.min_obstacle_clearance)
                                                                          : nlohmann::json(nullptr);
    j["leader_changes"] = s.leader_changes;
    j["plans_adopted"] = r.plans_adopted;
    j["plans_failed"] = r.plans_failed;
    j["ticks"] = r.trace.size();
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << text;
}

/// Writes `<dir>/trace.csv` and `<dir>/summary.json`.
inline void write_run(const std::filesystem::path& dir, const RunResult& r) {
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir / "trace.csv", std::ios::binary);
    if (!csv) throw Error(ErrorCode::InvalidArgument, "cannot write " + (dir / "trace.csv").string());
    write_trace_csv(csv, r);
    write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
}

/// Modes sorted by mission time, joined with " < " (or " = " when two times
/// are within `tie` seconds of each other).
inline std::string ordering_verdict(std::vector<std::pair<std::string, double>> times, double tie) {
    std::stable_sort(times.begin(), times.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    std::string out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) out += times[i].second - times[i - 1].second <= tie ? " = " : " < ";
        out += times[i].first;
    }
    return out;
}

}  // namespace swarm
