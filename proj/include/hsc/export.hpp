#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hsc/constraint.hpp"
#include "hsc/controller.hpp"
#include "hsc/simulator.hpp"

namespace hsc {

/// Column names for a run of an (n, r) plant, in file order.
std::vector<std::string> csv_header(int n, int r);

/// One row per record, 12 significant digits, LF line endings.
void write_csv(const SimResult& result, int n, int r, std::ostream& out);
/// Throws Error when the file cannot be written.
void export_csv(const SimResult& result, int n, int r, const std::string& path);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

struct Segment {
    Eigen::Vector2d a;
    Eigen::Vector2d b;
};

/// Zero level set of f over the planar box by marching squares on an
/// nx-by-ny grid of sample points, with linear interpolation along cell edges.
std::vector<Segment> zero_contour(const std::function<double(const Eigen::Vector2d&)>& f, const Box& box, int nx,
                                  int ny);

struct SvgOptions {
    int grid = 200;
    int snapshots = 4;
};

/// Writes trajectory.svg (x1 plane with constraint contours at snapshot
/// times; planar problems only) and signals.svg (alpha_h, alpha_s, rho_s
/// against time) into `dir`. Returns the files written.
std::vector<std::string> export_svg(const SimResult& result, const ControllerConfig& cfg, const Box& view,
                                    const std::string& dir, const SvgOptions& opts = {});

}  // namespace hsc
