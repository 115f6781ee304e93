#include "hsc/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "hsc/errors.hpp"

namespace hsc {

namespace fs = std::filesystem;

std::vector<std::string> csv_header(int n, int r) {
    std::vector<std::string> h{"t"};
    for (int i = 1; i <= r; ++i)
        for (int j = 1; j <= n; ++j) h.push_back("x" + std::to_string(i) + "_" + std::to_string(j));
    for (const char* c : {"alpha_h", "alpha_s", "e_s", "rho_n", "rho_r", "phi_h", "phi_gamma"}) h.emplace_back(c);
    for (int j = 1; j <= n; ++j) h.push_back("u_" + std::to_string(j));
    return h;
}

namespace {

void put(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
}

}  // namespace

void write_csv(const SimResult& result, int n, int r, std::ostream& out) {
    const auto header = csv_header(n, r);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& rec : result.records) {
        const auto& d = rec.diag;
        put(out, rec.t);
        for (Eigen::Index i = 0; i < rec.x.size(); ++i) {
            out << ',';
            put(out, rec.x[i]);
        }
        for (double v : {d.alpha_h, d.alpha_s, d.e_s, d.rho_n, d.rho_r, d.phi_h, d.phi_gamma}) {
            out << ',';
            put(out, v);
        }
        for (Eigen::Index i = 0; i < rec.u.size(); ++i) {
            out << ',';
            put(out, rec.u[i]);
        }
        out << '\n';
    }
}

void export_csv(const SimResult& result, int n, int r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_csv(result, n, r, out);
    if (!out) throw Error("write to '" + path + "' failed");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    CsvTable tab;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        if (first) {
            while (std::getline(ss, cell, ',')) tab.header.push_back(cell);
            first = false;
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

// ---------------------------------------------------------------------------

std::vector<Segment> zero_contour(const std::function<double(const Eigen::Vector2d&)>& f, const Box& box, int nx,
                                  int ny) {
    if (nx < 2 || ny < 2) throw ConfigError("contour grid needs at least 2 points per axis");
    const double x0 = box.lower[0], y0 = box.lower[1];
    const double hx = (box.upper[0] - x0) / (nx - 1);
    const double hy = (box.upper[1] - y0) / (ny - 1);
    std::vector<double> v(static_cast<std::size_t>(nx) * ny);
    auto at = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(j) * nx + i]; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) at(i, j) = f({x0 + i * hx, y0 + j * hy});

    auto cross = [](const Eigen::Vector2d& p, double a, const Eigen::Vector2d& q, double b) -> Eigen::Vector2d {
        const double s = a / (a - b);
        return p + s * (q - p);
    };

    std::vector<Segment> segs;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            // Corners counter-clockwise from the lower left.
            const Eigen::Vector2d p[4] = {{x0 + i * hx, y0 + j * hy},
                                          {x0 + (i + 1) * hx, y0 + j * hy},
                                          {x0 + (i + 1) * hx, y0 + (j + 1) * hy},
                                          {x0 + i * hx, y0 + (j + 1) * hy}};
            const double c[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
            std::vector<Eigen::Vector2d> hits;
            for (int e = 0; e < 4; ++e) {
                const int k = (e + 1) % 4;
                if ((c[e] > 0.0) != (c[k] > 0.0)) {
                    hits.push_back(cross(p[e], c[e], p[k], c[k]));
                }
            }
            if (hits.size() == 2) {
                segs.push_back({hits[0], hits[1]});
            } else if (hits.size() == 4) {
                const double centre = f(0.5 * (p[0] + p[2]));
                // Ambiguous saddle: the centre sign decides which corners connect.
                if ((centre > 0.0) == (c[0] > 0.0)) {
                    segs.push_back({hits[0], hits[1]});
                    segs.push_back({hits[2], hits[3]});
                } else {
                    segs.push_back({hits[0], hits[3]});
                    segs.push_back({hits[1], hits[2]});
                }
            }
        }
    }
    return segs;
}

// ---------------------------------------------------------------------------

namespace {

struct Frame {
    double x0, x1, y0, y1;  // data window
    double left, top, width, height;  // pixels

    double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void axes(std::ostream& out, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    out << "<rect x='" << num(f.left) << "' y='" << num(f.top) << "' width='" << num(f.width) << "' height='"
        << num(f.height) << "' fill='none' stroke='#333'/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        out << "<text x='" << num(f.px(xv)) << "' y='" << num(f.top + f.height + 14)
            << "' font-size='10' text-anchor='middle'>" << num(xv) << "</text>\n";
        out << "<text x='" << num(f.left - 4) << "' y='" << num(f.py(yv) + 3)
            << "' font-size='10' text-anchor='end'>" << num(yv) << "</text>\n";
    }
    out << "<text x='" << num(f.left + f.width / 2) << "' y='" << num(f.top + f.height + 30)
        << "' font-size='12' text-anchor='middle'>" << xlabel << "</text>\n";
    out << "<text x='" << num(f.left - 38) << "' y='" << num(f.top + f.height / 2)
        << "' font-size='12' text-anchor='middle' transform='rotate(-90 " << num(f.left - 38) << ' '
        << num(f.top + f.height / 2) << ")'>" << ylabel << "</text>\n";
}

void polyline(std::ostream& out, const Frame& f, const std::vector<Eigen::Vector2d>& pts, const std::string& colour,
              const std::string& extra = "") {
    if (pts.empty()) return;
    out << "<polyline fill='none' stroke='" << colour << "' stroke-width='1.5' " << extra << " points='";
    for (const auto& p : pts) out << num(f.px(p[0])) << ',' << num(f.py(p[1])) << ' ';
    out << "'/>\n";
}

void segments(std::ostream& out, const Frame& f, const std::vector<Segment>& segs, const std::string& colour,
              double opacity, const std::string& dash) {
    out << "<g stroke='" << colour << "' stroke-width='1.2' stroke-opacity='" << num(opacity) << "'"
        << (dash.empty() ? "" : " stroke-dasharray='" + dash + "'") << ">\n";
    for (const auto& s : segs) {
        out << "<line x1='" << num(f.px(s.a[0])) << "' y1='" << num(f.py(s.a[1])) << "' x2='" << num(f.px(s.b[0]))
            << "' y2='" << num(f.py(s.b[1])) << "'/>\n";
    }
    out << "</g>\n";
}

std::vector<std::size_t> snapshot_indices(std::size_t count, int snapshots) {
    std::vector<std::size_t> idx;
    if (count == 0) return idx;
    const int k = std::max(1, snapshots);
    for (int i = 0; i < k; ++i) {
        const std::size_t j = k == 1 ? count - 1 : (count - 1) * static_cast<std::size_t>(i) / (k - 1);
        if (idx.empty() || idx.back() != j) idx.push_back(j);
    }
    return idx;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << body;
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::string trajectory_svg(const SimResult& res, const ControllerConfig& cfg, const Box& view, const SvgOptions& o) {
    std::ostringstream out;
    const double w = 560, h = 560 * (view.upper[1] - view.lower[1]) / (view.upper[0] - view.lower[0]);
    const Frame f{view.lower[0], view.upper[0], view.lower[1], view.upper[1], 60, 20, w, h};
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(w + 200) << "' height='" << num(h + 70)
        << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
    axes(out, f, "x1_1 [m]", "x1_2 [m]");

    const auto snaps = snapshot_indices(res.records.size(), o.snapshots);
    const char* shades[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    double legend_y = 30;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const SimRecord& rec = res.records[snaps[k]];
        const double t = rec.t;
        const double opacity = 0.35 + 0.65 * (k + 1) / static_cast<double>(snaps.size());
        const std::string colour = shades[k % 6];
        segments(out, f,
                 zero_contour([&](const Eigen::Vector2d& x) { return cfg.hard.alpha(t, x); }, view, o.grid, o.grid),
                 "#d62728", opacity, "");
        segments(out, f,
                 zero_contour([&](const Eigen::Vector2d& x) { return cfg.soft.alpha(t, x); }, view, o.grid, o.grid),
                 colour, opacity, "");
        if (rec.x.size() >= 2) {
            out << "<circle cx='" << num(f.px(rec.x[0])) << "' cy='" << num(f.py(rec.x[1])) << "' r='4' fill='"
                << colour << "'/>\n";
        }
        out << "<circle cx='" << num(w + 80) << "' cy='" << num(legend_y - 4) << "' r='4' fill='" << colour
            << "'/><text x='" << num(w + 90) << "' y='" << num(legend_y) << "' font-size='11'>t = " << num(t)
            << " s</text>\n";
        legend_y += 16;
    }
    out << "<line x1='" << num(w + 72) << "' y1='" << num(legend_y - 4) << "' x2='" << num(w + 88) << "' y2='"
        << num(legend_y - 4) << "' stroke='#d62728'/><text x='" << num(w + 90) << "' y='" << num(legend_y)
        << "' font-size='11'>alpha_h = 0</text>\n";
    legend_y += 16;
    out << "<text x='" << num(w + 72) << "' y='" << num(legend_y) << "' font-size='11'>coloured: alpha_s = 0</text>\n";

    std::vector<Eigen::Vector2d> path;
    for (const auto& rec : res.records)
        if (rec.x.size() >= 2) path.emplace_back(rec.x[0], rec.x[1]);
    polyline(out, f, path, "#000");
    out << "</svg>\n";
    return out.str();
}

std::string signals_svg(const SimResult& res) {
    std::ostringstream out;
    const double w = 640, h = 180;
    double t_end = res.records.empty() ? 1.0 : res.records.back().t;
    if (t_end <= 0.0) t_end = 1.0;

    struct Panel {
        std::string label;
        std::vector<std::pair<std::string, std::function<double(const SimRecord&)>>> series;
    };
    const std::vector<Panel> panels = {
        {"hard",
         {{"alpha_h", [](const SimRecord& r) { return r.diag.alpha_h; }}}},
        {"soft",
         {{"alpha_s", [](const SimRecord& r) { return r.diag.alpha_s; }},
          {"rho_s", [](const SimRecord& r) { return r.diag.rho_s; }}}},
    };
    const char* colours[] = {"#1f77b4", "#ff7f0e"};
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(w + 180) << "' height='"
        << num(panels.size() * (h + 60) + 10) << "' font-family='sans-serif'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& s : panels[p].series)
            for (const auto& r : res.records) {
                const double v = s.second(r);
                if (std::isfinite(v)) {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        lo = std::min(lo, 0.0);
        hi = std::max(hi, 0.0);
        if (!(hi > lo)) hi = lo + 1.0;
        const double pad = 0.05 * (hi - lo);
        const Frame f{0.0, t_end, lo - pad, hi + pad, 70, 20 + p * (h + 60.0), w, h};
        axes(out, f, "t [s]", panels[p].label);
        out << "<line x1='" << num(f.left) << "' y1='" << num(f.py(0)) << "' x2='" << num(f.left + w) << "' y2='"
            << num(f.py(0)) << "' stroke='#999' stroke-dasharray='4 3'/>\n";
        for (std::size_t k = 0; k < panels[p].series.size(); ++k) {
            std::vector<Eigen::Vector2d> pts;
            const std::size_t step = std::max<std::size_t>(1, res.records.size() / 4000);
            for (std::size_t i = 0; i < res.records.size(); i += step)
                pts.emplace_back(res.records[i].t, panels[p].series[k].second(res.records[i]));
            if (!res.records.empty())
                pts.emplace_back(res.records.back().t, panels[p].series[k].second(res.records.back()));
            polyline(out, f, pts, colours[k % 2]);
            out << "<text x='" << num(w + 80) << "' y='" << num(f.top + 14 + 16 * k) << "' font-size='11' fill='"
                << colours[k % 2] << "'>" << panels[p].series[k].first << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace

std::vector<std::string> export_svg(const SimResult& result, const ControllerConfig& cfg, const Box& view,
                                    const std::string& dir, const SvgOptions& opts) {
    std::vector<std::string> written;
    const fs::path d(dir);
    if (cfg.n() == 2 && view.lower.size() == 2) {
        write_file(d / "trajectory.svg", trajectory_svg(result, cfg, view, opts));
        written.push_back((d / "trajectory.svg").string());
    }
    write_file(d / "signals.svg", signals_svg(result));
    written.push_back((d / "signals.svg").string());
    return written;
}

}  // namespace hsc
