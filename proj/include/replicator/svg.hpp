#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "replicator/equilibria.hpp"
#include "replicator/sweep.hpp"

namespace replicator::svg {

/// Minimal SVG canvas for the 1-simplex (a segment) and the 2-simplex (a
/// triangle). Stable fixed points are filled circles, others open circles.
class SimplexCanvas {
public:
    explicit SimplexCanvas(std::vector<std::string> labels) : labels_(std::move(labels))
    {
        if (labels_.size() != 2 && labels_.size() != 3)
            throw Error(ErrorCode::DimensionMismatch, "SVG drawing supports two or three opinions");
        frame();
    }

    /// Screen position of a simplex state.
    std::array<double, 2> place(const Vector& x) const
    {
        if (labels_.size() == 2)
            return {kMargin + x(0) * kWidth, kLineY};
        const Point2 p = to_ternary(x);
        return {kMargin + p.u * kWidth, kBaseY - p.v * kWidth};
    }

    /// Short arrow from x in the direction of the field v.
    void arrow(const Vector& x, const Vector& v, double length)
    {
        const auto a = place(x);
        double dx, dy;
        if (labels_.size() == 2) {
            dx = v(0);
            dy = 0.0;
        } else {
            dx = v(1) + 0.5 * v(2);
            dy = -0.86602540378443864676 * v(2);
        }
        const double norm = std::hypot(dx, dy);
        if (norm < 1e-12)
            return;
        dx *= length / norm;
        dy *= length / norm;
        const double bx = a[0] + dx, by = a[1] + dy;
        body_ << "<line x1=\"" << num(a[0]) << "\" y1=\"" << num(a[1]) << "\" x2=\"" << num(bx) << "\" y2=\""
              << num(by) << "\" stroke=\"#555\" stroke-width=\"1\"/>\n";
        const double ux = dx / length, uy = dy / length, head = 0.35 * length;
        const double lx = bx - head * (ux - 0.5 * uy), ly = by - head * (uy + 0.5 * ux);
        const double rx = bx - head * (ux + 0.5 * uy), ry = by - head * (uy - 0.5 * ux);
        body_ << "<polygon class=\"arrowhead\" points=\"" << num(bx) << ',' << num(by) << ' ' << num(lx) << ','
              << num(ly) << ' ' << num(rx) << ',' << num(ry) << "\" fill=\"#555\"/>\n";
    }

    void fixed_point(const FixedPoint& p)
    {
        const auto a = place(p.x.values());
        const bool filled = is_stable(p.classification);
        body_ << "<circle class=\"fixed-point\" cx=\"" << num(a[0]) << "\" cy=\"" << num(a[1])
              << "\" r=\"7\" fill=\"" << (filled ? "black" : "white") << "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    }

    void dashed_path(const std::vector<SimplexState>& path)
    {
        if (path.size() < 2)
            return;
        body_ << "<polyline class=\"locus\" fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" "
                 "stroke-dasharray=\"6,4\" points=\"";
        for (std::size_t i = 0; i < path.size(); ++i) {
            const auto a = place(path[i].values());
            body_ << (i ? " " : "") << num(a[0]) << ',' << num(a[1]);
        }
        body_ << "\"/>\n";
    }

    void dot(const Vector& x, const std::string& colour, double size)
    {
        const auto a = place(x);
        body_ << "<rect x=\"" << num(a[0] - size / 2) << "\" y=\"" << num(a[1] - size / 2) << "\" width=\""
              << num(size) << "\" height=\"" << num(size) << "\" fill=\"" << colour << "\"/>\n";
    }

    std::string str() const
    {
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kMargin * 2 + kWidth) << "\" height=\""
           << num(labels_.size() == 2 ? 2 * kLineY : kBaseY + kMargin) << "\">\n"
           << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
           << frame_.str() << body_.str() << "</svg>\n";
        return os.str();
    }

    static constexpr double kMargin = 60.0;
    static constexpr double kWidth = 480.0;
    static constexpr double kLineY = 80.0;
    static constexpr double kBaseY = kMargin + 0.86602540378443864676 * kWidth;

private:
    static std::string num(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    void frame()
    {
        if (labels_.size() == 2) {
            frame_ << "<line x1=\"" << num(kMargin) << "\" y1=\"" << num(kLineY) << "\" x2=\"" << num(kMargin + kWidth)
                   << "\" y2=\"" << num(kLineY) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
            frame_ << label(kMargin, kLineY + 30, "x_" + labels_[0] + " = 0");
            frame_ << label(kMargin + kWidth, kLineY + 30, "x_" + labels_[0] + " = 1");
            return;
        }
        const double top = kBaseY - 0.86602540378443864676 * kWidth;
        frame_ << "<polygon class=\"simplex\" points=\"" << num(kMargin) << ',' << num(kBaseY) << ' '
               << num(kMargin + kWidth) << ',' << num(kBaseY) << ' ' << num(kMargin + kWidth / 2) << ',' << num(top)
               << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
        frame_ << label(kMargin - 15, kBaseY + 20, labels_[0]);
        frame_ << label(kMargin + kWidth + 15, kBaseY + 20, labels_[1]);
        frame_ << label(kMargin + kWidth / 2, top - 12, labels_[2]);
    }

    static std::string label(double x, double y, const std::string& text)
    {
        return "<text x=\"" + num(x) + "\" y=\"" + num(y) +
               "\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">" + text + "</text>\n";
    }

    std::vector<std::string> labels_;
    std::ostringstream frame_;
    std::ostringstream body_;
};

inline std::string phase_portrait(const std::vector<std::string>& labels, const std::vector<FieldSample>& field,
                                  const std::vector<FixedPoint>& points, double resolution)
{
    SimplexCanvas canvas(labels);
    const double length = std::clamp(0.45 * resolution * SimplexCanvas::kWidth, 4.0, 30.0);
    for (const auto& s : field)
        canvas.arrow(s.x.values(), s.field, length);
    for (const auto& p : points)
        canvas.fixed_point(p);
    return canvas.str();
}

inline std::string basin_map(const std::vector<std::string>& labels, const BasinMap& map)
{
    static const std::array<const char*, 6> palette = {"#4e79a7", "#f28e2b", "#59a14f",
                                                       "#e15759", "#b07aa1", "#edc948"};
    SimplexCanvas canvas(labels);
    const double size = std::max(2.0, map.resolution * SimplexCanvas::kWidth * 0.8);
    for (std::size_t i = 0; i < map.grid.size(); ++i) {
        const int k = map.assignment[i];
        canvas.dot(map.grid[i].values(), k < 0 ? "#cccccc" : palette[static_cast<std::size_t>(k) % palette.size()],
                   size);
    }
    for (const auto& p : map.attractors)
        canvas.fixed_point(p);
    return canvas.str();
}

/// Loci as dashed polylines over the fixed points of the first sweep point.
inline std::string sweep_loci(const std::vector<std::string>& labels, const SweepResult& sweep)
{
    SimplexCanvas canvas(labels);
    for (const auto& l : sweep.loci)
        canvas.dashed_path(l.path);
    if (!sweep.points.empty())
        for (const auto& row : sweep.points.front().report.rows)
            canvas.fixed_point(row.point);
    return canvas.str();
}

} // namespace replicator::svg
