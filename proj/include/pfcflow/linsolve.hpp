#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfcflow/energy.hpp"
#include "pfcflow/grid.hpp"
#include "pfcflow/state.hpp"

namespace pfcflow {

struct SolveReport {
  int iterations = 0;
  /// ||A x - b||_d / ||b||_d of the returned x.
  double final_residual = 0.0;
  /// final_residual <= tol, or the residual sits at the rounding floor of
  /// applying A (see LinearOperator::norm_bound).
  bool converged = true;
};

struct SolverOptions {
  double tol = 1e-10;
  /// 0 selects 10 * sqrt(nx * ny).
  int maxit = 0;
  /// Use the cosine-transform inverse of the constant-coefficient part.
  bool spectral_preconditioner = true;

  int max_iterations(const GridSpec& g) const;
};

/// Raised when the k x k reduced matrix of a bordered solve is singular.
class SingularSystemError : public std::runtime_error {
public:
  SingularSystemError(const std::string& what, double pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

private:
  double pivot_;
};

/// Unnormalized 2D DCT-II (forward) and DCT-III (inverse) on an nx x ny array,
/// x-fastest. inverse(forward(f)) = 4 nx ny f. Immutable and shareable.
class CosineTransform {
public:
  CosineTransform(int nx, int ny);
  ~CosineTransform();
  CosineTransform(const CosineTransform&) = delete;
  CosineTransform& operator=(const CosineTransform&) = delete;

  /// Process-wide cache keyed by shape.
  static std::shared_ptr<const CosineTransform> shared(int nx, int ny);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  /// In-place transforms of nx*ny values.
  void forward(double* data) const;
  void inverse(double* data) const;

private:
  int nx_;
  int ny_;
  void* forward_plan_;
  void* inverse_plan_;
};

/// Eigenvalues of the mirror-ghost Laplacian in cosine mode (k, l):
/// -(4/hx^2) sin^2(pi k / 2nx) - (4/hy^2) sin^2(pi l / 2ny), x-fastest.
std::vector<double> laplacian_symbol(const GridSpec& g);

/// Operator that is diagonal in the cosine basis.
class SpectralMultiplier {
public:
  SpectralMultiplier(const GridSpec& g, std::vector<double> symbol);
  void apply(const Field& in, Field& out) const;
  Field operator()(const Field& in) const;
  const std::vector<double>& symbol() const noexcept { return symbol_; }

private:
  GridSpec grid_;
  std::vector<double> symbol_;
  std::shared_ptr<const CosineTransform> transform_;
};

/// Matrix-free linear map on Fields of one grid.
class LinearOperator {
public:
  using ApplyFn = std::function<void(const Field&, Field&)>;

  LinearOperator(const GridSpec& g, ApplyFn apply, bool symmetric, std::string tag = {});

  void apply(const Field& f, Field& out) const { apply_(f, out); }
  Field operator()(const Field& f) const;

  const GridSpec& grid() const noexcept { return grid_; }
  bool symmetric() const noexcept { return symmetric_; }
  const std::string& tag() const noexcept { return tag_; }

  /// Approximate inverse used as preconditioner; may be null.
  const std::shared_ptr<const SpectralMultiplier>& preconditioner() const noexcept {
    return preconditioner_;
  }
  void set_preconditioner(std::shared_ptr<const SpectralMultiplier> p) {
    preconditioner_ = std::move(p);
  }

  /// Upper bound on the operator norm, used to detect when the residual has
  /// reached the rounding floor eps ||A|| ||x||. Zero disables the floor.
  double norm_bound() const noexcept { return norm_bound_; }
  void set_norm_bound(double v) noexcept { norm_bound_ = v; }

  static LinearOperator identity(const GridSpec& g);

private:
  GridSpec grid_;
  ApplyFn apply_;
  bool symmetric_;
  std::string tag_;
  double norm_bound_ = 0.0;
  std::shared_ptr<const SpectralMultiplier> preconditioner_;
};

/// Extrapolated quantities frozen into a step operator.
struct FrozenCoefficients {
  /// q-bar for EQ schemes (the operator uses q-bar^2 / 4); ignored for SAV.
  std::optional<Field> q_bar;
};

/// AC family:  f + dt M (K f [+ q-bar^2/4 f])
/// CH family:  f - dt M lap (K f [+ q-bar^2/4 f])
/// The attached preconditioner inverts the same map with q-bar^2 replaced by
/// its spatial mean. Throws UsageError when dt M exceeds the solvability
/// bound on this grid (some cosine mode of the constant part is non-positive).
LinearOperator build_operator(SchemeId scheme, const GridSpec& grid, const FrozenCoefficients& frozen,
                              const ModelParams& p, double dt, bool with_preconditioner = true);

/// Largest dt M for which I + dt M K is positive definite on grid g
/// (infinity when K is already non-negative).
double solvability_bound(const GridSpec& g, const ModelParams& p);

/// Smallest eigenvalue of K on grid g.
double linear_part_min_eigenvalue(const GridSpec& g, const ModelParams& p);

/// Preconditioned conjugate gradients. A must be self-adjoint and positive
/// definite in <.,.>; debug builds probe the symmetry.
std::pair<Field, SolveReport> solve_spd(const LinearOperator& A, const Field& b,
                                        const SolverOptions& opts = {});

/// Right-preconditioned BiCGSTAB for non-self-adjoint operators.
std::pair<Field, SolveReport> solve_nonsymmetric(const LinearOperator& A, const Field& b,
                                                 const SolverOptions& opts = {});

/// solve_spd for symmetric operators, BiCGSTAB otherwise.
std::pair<Field, SolveReport> solve(const LinearOperator& A, const Field& b,
                                    const SolverOptions& opts = {});

/// Rank-one term <c, x> d.
struct Coupling {
  Field c;
  Field d;
};

/// A x + sum_i <c_i, x> d_i = b
struct BorderedSystem {
  LinearOperator A;
  std::vector<Coupling> couplings;
  Field b;

  Field apply(const Field& x) const;
  Field residual(const Field& x) const;
};

struct BorderedSolution {
  Field x;
  /// s_i = <c_i, x>
  std::vector<double> scalars;
  SolveReport report;
};

/// Sherman-Morrison / Woodbury reduction: A x_i = d_i, A y = b, then a dense
/// k x k solve for the scalars. Throws SingularSystemError when
/// I + [<c_i, A^-1 d_j>] is singular.
BorderedSolution solve_bordered(const BorderedSystem& sys, const SolverOptions& opts = {});

}  // namespace pfcflow
