#include "wforge/grid_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "wforge/errors.hpp"
#include "wforge/parallel.hpp"

namespace wforge {

namespace {
constexpr char kMagic[4] = {'W', 'F', 'G', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* field) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError(std::string("grid header truncated at field '") + field + "'");
  return v;
}
}  // namespace

Grid sample_grid(const Expr& f, const Domain& domain, int nx, int ny) {
  if (nx < 2 || ny < 2) throw ConfigError("sample_grid: nx and ny must be >= 2");
  Grid g;
  g.nx = static_cast<std::uint32_t>(nx);
  g.ny = static_cast<std::uint32_t>(ny);
  g.xmin = domain.rect_min.x;
  g.xmax = domain.rect_max.x;
  g.ymin = domain.rect_min.y;
  g.ymax = domain.rect_max.y;
  g.data.resize(static_cast<std::size_t>(nx) * ny);
  const Evaluator tape(f);
  parallel_for(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
    thread_local EvalScratch scratch;
    for (std::size_t j = jb; j < je; ++j)
      for (int i = 0; i < nx; ++i)
        g.data[j * nx + i] =
            tape.eval(Vec2{g.x_at(static_cast<std::uint32_t>(i)),
                           g.y_at(static_cast<std::uint32_t>(j))},
                      scratch);
  });
  return g;
}

void write_grid(const Grid& g, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, g.nx);
  put<std::uint32_t>(os, g.ny);
  put<float>(os, static_cast<float>(g.xmin));
  put<float>(os, static_cast<float>(g.xmax));
  put<float>(os, static_cast<float>(g.ymin));
  put<float>(os, static_cast<float>(g.ymax));
  put<std::uint32_t>(os, 0u);  // reserved
  os.write(reinterpret_cast<const char*>(g.data.data()),
           static_cast<std::streamsize>(g.data.size() * sizeof(double)));
  if (!os) throw IoError("short write to '" + path + "'");
}

Grid read_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("grid header field 'magic' is not \"WFG1\" in '" + path + "'");
  Grid g;
  g.nx = get<std::uint32_t>(is, "nx");
  g.ny = get<std::uint32_t>(is, "ny");
  if (g.nx == 0 || g.ny == 0) throw IoError("grid header field 'nx/ny' has zero extent");
  g.xmin = get<float>(is, "xmin");
  g.xmax = get<float>(is, "xmax");
  g.ymin = get<float>(is, "ymin");
  g.ymax = get<float>(is, "ymax");
  (void)get<std::uint32_t>(is, "reserved");
  const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny;
  if (n > (1u << 28)) throw IoError("grid header field 'nx/ny' implausibly large");
  g.data.resize(n);
  is.read(reinterpret_cast<char*>(g.data.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is || static_cast<std::size_t>(is.gcount()) != n * sizeof(double))
    throw IoError("grid payload truncated in '" + path + "'");
  return g;
}

void write_grid_csv(const Grid& g, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "x,y,value\n";
  char buf[96];
  for (std::uint32_t j = 0; j < g.ny; ++j)
    for (std::uint32_t i = 0; i < g.nx; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.x_at(i), g.y_at(j), g.at(i, j));
      os << buf;
    }
  if (!os) throw IoError("short write to '" + path + "'");
}

GridField::GridField(Grid g) : g_(std::move(g)) {
  if (g_.nx < 4 || g_.ny < 4)
    throw PreconditionError("cubic grid interpolation needs at least 4 samples per axis");
  hx_ = (g_.xmax - g_.xmin) / (g_.nx - 1);
  hy_ = (g_.ymax - g_.ymin) / (g_.ny - 1);
  if (!(hx_ > 0.0) || !(hy_ > 0.0))
    throw PreconditionError("grid interpolation needs increasing axis bounds");
}

namespace {

// Cubic Lagrange basis on nodes {0, 1, 2, 3} and its derivative.
void lagrange_weights(double t, int order, double w[4]) {
  if (order == 0) {
    w[0] = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    w[1] = t * (t - 2.0) * (t - 3.0) / 2.0;
    w[2] = -t * (t - 1.0) * (t - 3.0) / 2.0;
    w[3] = t * (t - 1.0) * (t - 2.0) / 6.0;
  } else {
    w[0] = -(3.0 * t * t - 12.0 * t + 11.0) / 6.0;
    w[1] = (3.0 * t * t - 10.0 * t + 6.0) / 2.0;
    w[2] = -(3.0 * t * t - 8.0 * t + 3.0) / 2.0;
    w[3] = (3.0 * t * t - 6.0 * t + 2.0) / 6.0;
  }
}

int stencil_base(double u, std::uint32_t n) {
  int i = static_cast<int>(std::floor(u));
  i = std::clamp(i - 1, 0, static_cast<int>(n) - 4);
  return i;
}

}  // namespace

double GridField::eval(Vec2 p, int dx, int dy) const {
  const double u = (p.x - g_.xmin) / hx_;
  const double v = (p.y - g_.ymin) / hy_;
  const int bi = stencil_base(u, g_.nx);
  const int bj = stencil_base(v, g_.ny);
  double wx[4], wy[4];
  lagrange_weights(u - bi, dx, wx);
  lagrange_weights(v - bj, dy, wy);
  double acc = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double* row = g_.data.data() + static_cast<std::size_t>(bj + j) * g_.nx + bi;
    acc += wy[j] * (wx[0] * row[0] + wx[1] * row[1] + wx[2] * row[2] + wx[3] * row[3]);
  }
  double s = 1.0;
  if (dx == 1) s /= hx_;
  if (dy == 1) s /= hy_;
  return acc * s;
}

}  // namespace wforge
