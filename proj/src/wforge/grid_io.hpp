#pragma once

#include <string>
#include <vector>

#include "wforge/domain.hpp"
#include "wforge/expr.hpp"

namespace wforge {

/// Row-major sampled scalar field: value(i, j) = data[j * nx + i] at
/// (xmin + i*(xmax-xmin)/(nx-1), ymin + j*(ymax-ymin)/(ny-1)).
struct Grid {
  std::uint32_t nx = 0, ny = 0;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  std::vector<double> data;

  [[nodiscard]] double x_at(std::uint32_t i) const {
    return nx > 1 ? xmin + (xmax - xmin) * i / (nx - 1) : xmin;
  }
  [[nodiscard]] double y_at(std::uint32_t j) const {
    return ny > 1 ? ymin + (ymax - ymin) * j / (ny - 1) : ymin;
  }
  [[nodiscard]] double at(std::uint32_t i, std::uint32_t j) const {
    return data[static_cast<std::size_t>(j) * nx + i];
  }
};

/// Sample an expression tree on an (nx x ny) lattice over the base rectangle.
Grid sample_grid(const Expr& f, const Domain& domain, int nx, int ny);

/// Binary grid file: 32-byte header (magic "WFG1", u32 nx, u32 ny,
/// f32 xmin/xmax/ymin/ymax, u32 reserved) followed by nx*ny row-major f64.
void write_grid(const Grid& g, const std::string& path);

/// Reads a binary grid file; throws IoError naming the offending header field
/// on a bad magic, zero extent, or truncated payload.
Grid read_grid(const std::string& path);

/// CSV variant with header "x,y,value", one row per sample.
void write_grid_csv(const Grid& g, const std::string& path);

/// Piecewise-cubic tensor Lagrange interpolant over a sampled grid, with
/// analytic first derivatives of the local patch.  One-sided stencils are
/// used at the boundary, so cubics are reproduced exactly everywhere.
/// Requires nx, ny >= 4.
class GridField {
 public:
  explicit GridField(Grid g);

  [[nodiscard]] double value(Vec2 p) const { return eval(p, 0, 0); }
  /// Partial derivative of total order <= 1 per axis (dx, dy in {0, 1}).
  [[nodiscard]] double deriv(Vec2 p, int dx, int dy) const { return eval(p, dx, dy); }

  [[nodiscard]] const Grid& grid() const { return g_; }

 private:
  [[nodiscard]] double eval(Vec2 p, int dx, int dy) const;

  Grid g_;
  double hx_ = 1.0, hy_ = 1.0;
};

}  // namespace wforge
