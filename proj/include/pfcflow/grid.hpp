#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfcflow {

/// Thrown when an operation is called with arguments that violate its contract
/// (mismatched grids, out-of-range parameters, wrong scheme family).
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform cell-centered grid on [x0, x0 + lx] x [y0, y0 + ly].
///
/// Cell (i, j), zero-based, has its center at
/// (x0 + (i + 1/2) hx, y0 + (j + 1/2) hy).
class GridSpec {
public:
  GridSpec(int nx, int ny, double lx, double ly, double x0 = 0.0, double y0 = 0.0);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  double hx() const noexcept { return hx_; }
  double hy() const noexcept { return hy_; }
  double x0() const noexcept { return x0_; }
  double y0() const noexcept { return y0_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }
  double cell_area() const noexcept { return hx_ * hy_; }
  double area() const noexcept { return lx_ * ly_; }

  double x(int i) const noexcept { return x0_ + (i + 0.5) * hx_; }
  double y(int j) const noexcept { return y0_ + (j + 0.5) * hy_; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
  double hx_;
  double hy_;
  double x0_;
  double y0_;
};

/// Cell-centered scalar field. Storage is x-fastest: index = i + nx * j.
class Field {
public:
  explicit Field(const GridSpec& grid, double value = 0.0);
  Field(const GridSpec& grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j) noexcept { return data_[i + static_cast<std::size_t>(grid_.nx()) * j]; }
  double operator()(int i, int j) const noexcept { return data_[i + static_cast<std::size_t>(grid_.nx()) * j]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s) noexcept;

  /// this += s * other
  Field& axpy(double s, const Field& other);

  bool all_finite() const noexcept;

  friend bool operator==(const Field&, const Field&) = default;

private:
  GridSpec grid_;
  std::vector<double> data_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(double s, Field f);
/// Pointwise product.
Field hadamard(const Field& f, const Field& g);

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

/// Five-point Laplacian with mirror ghost cells (homogeneous Neumann).
Field laplacian(const Field& f);
void laplacian_into(const Field& f, Field& out);

/// laplacian(laplacian(f)); the mirror ghosts of the second pass encode
/// n . grad(lap f) = 0.
Field biharmonic(const Field& f);
void biharmonic_into(const Field& f, Field& out, Field& scratch);

/// <f, g> = hx hy sum f_ij g_ij
double inner(const Field& f, const Field& g);
/// <f, 1>
double integrate(const Field& f);
/// sqrt(<f, f>)
double norm(const Field& f);
double max_abs(const Field& f);

}  // namespace pfcflow
