#include "pfcflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace pfcflow {

GridSpec::GridSpec(int nx, int ny, double lx, double ly, double x0, double y0)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly), hx_(lx / nx), hy_(ly / ny), x0_(x0), y0_(y0) {
  // The biharmonic stencil reaches two cells out; below 4 cells the mirrored
  // ghosts overlap the opposite wall.
  if (nx < 4 || ny < 4) {
    throw UsageError("GridSpec: nx and ny must be >= 4, got " + std::to_string(nx) + "x" +
                     std::to_string(ny));
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw UsageError("GridSpec: domain lengths must be positive and finite");
  }
}

Field::Field(const GridSpec& grid, double value) : grid_(grid), data_(grid.size(), value) {}

Field::Field(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), data_(std::move(values)) {
  if (data_.size() != grid_.size()) {
    throw UsageError("Field: value count " + std::to_string(data_.size()) +
                     " does not match grid size " + std::to_string(grid_.size()));
  }
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (!(a == b)) {
    throw UsageError(std::string(where) + ": fields live on different grids");
  }
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Field& Field::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::axpy");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
  return *this;
}

bool Field::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(double s, Field f) { return f *= s; }

Field hadamard(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "hadamard");
  Field out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k] * g[k];
  return out;
}

void laplacian_into(const Field& f, Field& out) {
  require_same_grid(f.grid(), out.grid(), "laplacian");
  const GridSpec& g = f.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());
  for (int j = 0; j < ny; ++j) {
    const int jm = j == 0 ? 0 : j - 1;
    const int jp = j == ny - 1 ? ny - 1 : j + 1;
    for (int i = 0; i < nx; ++i) {
      const int im = i == 0 ? 0 : i - 1;
      const int ip = i == nx - 1 ? nx - 1 : i + 1;
      const double c = f(i, j);
      out(i, j) = (f(ip, j) - 2.0 * c + f(im, j)) * cx + (f(i, jp) - 2.0 * c + f(i, jm)) * cy;
    }
  }
}

Field laplacian(const Field& f) {
  Field out(f.grid());
  laplacian_into(f, out);
  return out;
}

void biharmonic_into(const Field& f, Field& out, Field& scratch) {
  laplacian_into(f, scratch);
  laplacian_into(scratch, out);
}

Field biharmonic(const Field& f) {
  Field scratch(f.grid());
  Field out(f.grid());
  biharmonic_into(f, out, scratch);
  return out;
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += f[k] * g[k];
  return f.grid().cell_area() * sum;
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return f.grid().cell_area() * sum;
}

double norm(const Field& f) { return std::sqrt(inner(f, f)); }

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace pfcflow
