#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "replicator/dynamics.hpp"
#include "replicator/equilibria.hpp"
#include "replicator/stochastic.hpp"
#include "replicator/sweep.hpp"

namespace replicator::io {

using nlohmann::json;

/// 12 significant digits; negative zero prints as 0.
inline std::string fmt(double v)
{
    if (v == 0.0)
        v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Rounds to the value that fmt() prints, so JSON carries the same digits.
inline double snap(double v) { return std::strtod(fmt(v).c_str(), nullptr); }

/// "a", "a+bi" or "a-bi".
inline std::string fmt(std::complex<double> z)
{
    std::string s = fmt(z.real());
    if (z.imag() != 0.0) {
        const std::string im = fmt(std::abs(z.imag()));
        s += (z.imag() < 0 ? "-" : "+") + im + "i";
    }
    return s;
}

inline std::string join(const Vector& x, const char* sep = " ")
{
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i)
            s += sep;
        s += fmt(x(i));
    }
    return s;
}

inline std::string join(const Spectrum& ev, const char* sep = " ")
{
    std::string s;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (i)
            s += sep;
        s += fmt(ev[i]);
    }
    return s;
}

inline json to_json(const Vector& x)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i)
        a.push_back(snap(x(i)));
    return a;
}

inline json to_json(const Spectrum& ev)
{
    json a = json::array();
    for (const auto& z : ev)
        a.push_back(fmt(z));
    return a;
}

inline std::string coordinate_header(std::size_t n, const char* prefix = "x_")
{
    std::string s;
    for (std::size_t i = 0; i < n; ++i)
        s += std::string(i ? "," : "") + prefix + std::to_string(i);
    return s;
}

// Trajectories ---------------------------------------------------------------

inline void write_csv(std::ostream& out, const Trajectory& traj)
{
    const auto n = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t," << coordinate_header(n) << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        out << fmt(traj.times[k]) << ',' << join(traj.states[k].values(), ",") << '\n';
}

inline json to_json(const Trajectory& traj, const std::vector<std::string>& labels)
{
    json j;
    j["labels"] = labels;
    json times = json::array();
    json states = json::array();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        times.push_back(snap(traj.times[k]));
        states.push_back(to_json(traj.states[k].values()));
    }
    j["times"] = std::move(times);
    j["states"] = std::move(states);
    j["converged"] = traj.converged;
    return j;
}

// Fixed-point tables -----------------------------------------------------------

inline std::string existence_text(const ExistenceCondition& c)
{
    if (c.description == "always")
        return "existent";
    return (c.holds ? "existent if " : "absent unless ") + c.description;
}

inline void write_csv(std::ostream& out, const TableReport& report)
{
    out << "index,coordinates,eigenvalues,reduced_eigenvalues,existence,classification,degenerate\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& row = report.rows[i];
        out << i + 1 << ',' << join(row.point.x.values()) << ',' << join(row.point.eigen_full) << ','
            << join(row.point.eigen_reduced) << ',' << existence_text(row.existence) << ','
            << to_string(row.point.classification) << ',' << (row.point.degenerate ? "yes" : "no") << '\n';
    }
}

inline json to_json(const FixedPoint& p)
{
    json j;
    j["x"] = to_json(p.x.values());
    j["support"] = p.support;
    j["eigen_full"] = to_json(p.eigen_full);
    j["eigen_reduced"] = to_json(p.eigen_reduced);
    j["classification"] = std::string(to_string(p.classification));
    j["degenerate"] = p.degenerate;
    return j;
}

inline json to_json(const PayoffMatrix& a)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.entries().rows(); ++i)
        rows.push_back(to_json(Vector(a.entries().row(i).transpose())));
    return rows;
}

inline json to_json(const TableReport& report)
{
    json j;
    j["model"] = report.model;
    j["labels"] = report.matrix.label_names();
    j["matrix"] = to_json(report.matrix);
    json rows = json::array();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        json r = to_json(report.rows[i].point);
        r["index"] = i + 1;
        r["existence"] = {{"description", report.rows[i].existence.description},
                          {"holds", report.rows[i].existence.holds}};
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

// Phase fields -----------------------------------------------------------------

inline void write_csv(std::ostream& out, const std::vector<FieldSample>& field)
{
    if (field.empty())
        return;
    const auto n = field.front().x.size();
    out << coordinate_header(n) << ',' << coordinate_header(n, "v_") << ",speed";
    if (field.front().ternary)
        out << ",u,v";
    out << '\n';
    for (const auto& s : field) {
        out << join(s.x.values(), ",") << ',' << join(s.field, ",") << ',' << fmt(s.speed);
        if (s.ternary)
            out << ',' << fmt(s.ternary->u) << ',' << fmt(s.ternary->v);
        out << '\n';
    }
}

inline json to_json(const std::vector<FieldSample>& field, const std::vector<FixedPoint>& points,
                    const std::vector<std::string>& labels)
{
    json j;
    j["labels"] = labels;
    json samples = json::array();
    for (const auto& s : field) {
        json e = {{"x", to_json(s.x.values())}, {"field", to_json(s.field)}, {"speed", snap(s.speed)}};
        if (s.ternary)
            e["ternary"] = {snap(s.ternary->u), snap(s.ternary->v)};
        samples.push_back(std::move(e));
    }
    j["samples"] = std::move(samples);
    json fps = json::array();
    for (const auto& p : points)
        fps.push_back(to_json(p));
    j["fixed_points"] = std::move(fps);
    return j;
}

// Basins -----------------------------------------------------------------------

inline void write_csv(std::ostream& out, const BasinMap& map)
{
    const auto n = map.grid.empty() ? 0 : map.grid.front().size();
    out << "index," << coordinate_header(n) << ",attractor\n";
    for (std::size_t i = 0; i < map.grid.size(); ++i)
        out << i << ',' << join(map.grid[i].values(), ",") << ',' << map.assignment[i] << '\n';
}

inline json to_json(const BasinMap& map, const std::vector<std::string>& labels)
{
    json j;
    j["labels"] = labels;
    j["resolution"] = snap(map.resolution);
    json att = json::array();
    for (const auto& p : map.attractors)
        att.push_back(to_json(p));
    j["attractors"] = std::move(att);
    json fr = json::array();
    for (double f : map.fractions())
        fr.push_back(snap(f));
    j["fractions"] = std::move(fr);
    json grid = json::array();
    for (const auto& x : map.grid)
        grid.push_back(to_json(x.values()));
    j["grid"] = std::move(grid);
    j["assignment"] = map.assignment;
    j["unresolved"] = map.unresolved.size();
    return j;
}

// Sweeps -----------------------------------------------------------------------

inline std::string opt_fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string{}; }

inline void write_csv(std::ostream& out, const SweepResult& sweep)
{
    out << "r,delta,count,stable,fixed_points\n";
    for (const auto& sp : sweep.points) {
        std::size_t stable = 0;
        std::string pts;
        for (const auto& row : sp.report.rows) {
            stable += is_stable(row.point.classification) ? 1 : 0;
            if (!pts.empty())
                pts += '|';
            pts += join(row.point.x.values()) + ":" + std::string(to_string(row.point.classification));
        }
        out << opt_fmt(sp.r) << ',' << opt_fmt(sp.delta) << ',' << sp.report.rows.size() << ',' << stable << ','
            << pts << '\n';
    }
}

inline json to_json(const SweepResult& sweep)
{
    json j;
    json pts = json::array();
    for (const auto& sp : sweep.points) {
        json e = to_json(sp.report);
        e["r"] = sp.r ? json(snap(*sp.r)) : json(nullptr);
        e["delta"] = sp.delta ? json(snap(*sp.delta)) : json(nullptr);
        e["count"] = sp.report.rows.size();
        pts.push_back(std::move(e));
    }
    j["points"] = std::move(pts);
    json loci = json::array();
    for (const auto& l : sweep.loci) {
        json path = json::array();
        for (const auto& x : l.path)
            path.push_back(to_json(x.values()));
        loci.push_back({{"support", l.support}, {"grid_index", l.grid_index}, {"path", std::move(path)}});
    }
    j["loci"] = std::move(loci);
    return j;
}

// Stochastic snapshots ----------------------------------------------------------

inline void write_csv(std::ostream& out, const std::vector<Snapshot>& snaps)
{
    const auto n = snaps.empty() ? 0 : static_cast<std::size_t>(snaps.front().x.size());
    out << "step," << coordinate_header(n) << '\n';
    for (const auto& s : snaps)
        out << s.step << ',' << join(s.x, ",") << '\n';
}

inline json to_json(const std::vector<Snapshot>& snaps, const std::vector<std::string>& labels, std::int64_t total,
                    std::uint64_t seed)
{
    json j;
    j["labels"] = labels;
    j["N"] = total;
    j["seed"] = seed;
    json arr = json::array();
    for (const auto& s : snaps)
        arr.push_back({{"step", s.step}, {"x", to_json(s.x)}});
    j["snapshots"] = std::move(arr);
    return j;
}

} // namespace replicator::io
