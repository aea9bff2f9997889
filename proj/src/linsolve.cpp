#include "pfcflow/linsolve.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace pfcflow {

namespace {

// FFTW's planner is not re-entrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr int kMaxRestarts = 3;
// Rounding of one application of A is modeled as kFloorFactor eps |A| |x|.
constexpr double kFloorFactor = 100.0;

}  // namespace

int SolverOptions::max_iterations(const GridSpec& g) const {
  if (maxit > 0) return maxit;
  return static_cast<int>(std::ceil(10.0 * std::sqrt(static_cast<double>(g.size()))));
}

// ---------------------------------------------------------------------------
// Cosine transform

CosineTransform::CosineTransform(int nx, int ny) : nx_(nx), ny_(ny) {
  std::lock_guard lock(planner_mutex());
  double* buf = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  // FFTW is row-major: the slow dimension (y) comes first.
  forward_plan_ = fftw_plan_r2r_2d(ny, nx, buf, buf, FFTW_REDFT10, FFTW_REDFT10, flags);
  inverse_plan_ = fftw_plan_r2r_2d(ny, nx, buf, buf, FFTW_REDFT01, FFTW_REDFT01, flags);
  fftw_free(buf);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw std::runtime_error("CosineTransform: FFTW planning failed");
  }
}

CosineTransform::~CosineTransform() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

std::shared_ptr<const CosineTransform> CosineTransform::shared(int nx, int ny) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const CosineTransform>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{nx, ny}];
  if (!slot) slot = std::make_shared<const CosineTransform>(nx, ny);
  return slot;
}

void CosineTransform::forward(double* data) const {
  fftw_execute_r2r(static_cast<fftw_plan>(forward_plan_), data, data);
}

void CosineTransform::inverse(double* data) const {
  fftw_execute_r2r(static_cast<fftw_plan>(inverse_plan_), data, data);
}

std::vector<double> laplacian_symbol(const GridSpec& g) {
  const int nx = g.nx();
  const int ny = g.ny();
  std::vector<double> sx(nx), sy(ny);
  for (int k = 0; k < nx; ++k) {
    const double s = std::sin(std::numbers::pi * k / (2.0 * nx));
    sx[k] = -4.0 * s * s / (g.hx() * g.hx());
  }
  for (int l = 0; l < ny; ++l) {
    const double s = std::sin(std::numbers::pi * l / (2.0 * ny));
    sy[l] = -4.0 * s * s / (g.hy() * g.hy());
  }
  std::vector<double> out(g.size());
  for (int l = 0; l < ny; ++l) {
    for (int k = 0; k < nx; ++k) out[k + static_cast<std::size_t>(nx) * l] = sx[k] + sy[l];
  }
  return out;
}

SpectralMultiplier::SpectralMultiplier(const GridSpec& g, std::vector<double> symbol)
    : grid_(g), symbol_(std::move(symbol)), transform_(CosineTransform::shared(g.nx(), g.ny())) {
  if (symbol_.size() != g.size()) throw UsageError("SpectralMultiplier: symbol size mismatch");
  const double scale = 1.0 / (4.0 * g.nx() * g.ny());
  for (double& s : symbol_) s *= scale;
}

void SpectralMultiplier::apply(const Field& in, Field& out) const {
  require_same_grid(grid_, in.grid(), "SpectralMultiplier");
  std::vector<double> buf(in.values().begin(), in.values().end());
  transform_->forward(buf.data());
  for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= symbol_[k];
  transform_->inverse(buf.data());
  std::copy(buf.begin(), buf.end(), out.values().begin());
}

Field SpectralMultiplier::operator()(const Field& in) const {
  Field out(in.grid());
  apply(in, out);
  return out;
}

// ---------------------------------------------------------------------------
// Operators

LinearOperator::LinearOperator(const GridSpec& g, ApplyFn apply, bool symmetric, std::string tag)
    : grid_(g), apply_(std::move(apply)), symmetric_(symmetric), tag_(std::move(tag)) {}

Field LinearOperator::operator()(const Field& f) const {
  Field out(f.grid());
  apply_(f, out);
  return out;
}

LinearOperator LinearOperator::identity(const GridSpec& g) {
  LinearOperator op(
      g, [](const Field& f, Field& out) { std::copy(f.values().begin(), f.values().end(), out.values().begin()); },
      true, "identity");
  op.set_norm_bound(1.0);
  return op;
}

namespace {

double k_symbol(double kappa, const ModelParams& p) {
  return 0.5 * kappa * kappa - p.a * kappa + 0.5 * p.alpha;
}

}  // namespace

double linear_part_min_eigenvalue(const GridSpec& g, const ModelParams& p) {
  double m = std::numeric_limits<double>::infinity();
  for (double lam : laplacian_symbol(g)) m = std::min(m, k_symbol(-lam, p));
  return m;
}

double solvability_bound(const GridSpec& g, const ModelParams& p) {
  const double m = linear_part_min_eigenvalue(g, p);
  if (m >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / m;
}

LinearOperator build_operator(SchemeId scheme, const GridSpec& grid, const FrozenCoefficients& frozen,
                              const ModelParams& p, double dt, bool with_preconditioner) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw UsageError("build_operator: dt must be finite and >= 0");
  const bool ch = family_of(scheme) == Family::CahnHilliard;
  const bool eq = aux_kind_of(scheme) == AuxKind::EqField;
  const double tm = dt * p.mobility;

  std::shared_ptr<const Field> quarter_w;
  double mean_quarter_w = 0.0;
  if (eq) {
    if (!frozen.q_bar) throw UsageError("build_operator: EQ schemes need a frozen q-bar");
    require_same_grid(grid, frozen.q_bar->grid(), "build_operator");
    Field w = hadamard(*frozen.q_bar, *frozen.q_bar);
    w *= 0.25;
    mean_quarter_w = integrate(w) / grid.area();
    quarter_w = std::make_shared<const Field>(std::move(w));
  }

  const double a = p.a;
  const double alpha = p.alpha;
  auto apply = [ch, tm, a, alpha, quarter_w](const Field& f, Field& out) {
    const GridSpec& g = f.grid();
    Field kf(g);
    Field scratch(g);
    apply_linear_part(f, a, alpha, kf, scratch);
    if (quarter_w) {
      for (std::size_t k = 0; k < f.size(); ++k) kf[k] += (*quarter_w)[k] * f[k];
    }
    if (ch) {
      laplacian_into(kf, scratch);
      for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k] - tm * scratch[k];
    } else {
      for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k] + tm * kf[k];
    }
  };

  // Constant-coefficient symbol; the w = 0 version decides solvability.
  const std::vector<double> lam = laplacian_symbol(grid);
  double max_quarter_w = 0.0;
  if (quarter_w) {
    for (double v : quarter_w->values()) max_quarter_w = std::max(max_quarter_w, v);
  }
  double bound = 0.0;
  std::vector<double> inv(lam.size());
  for (std::size_t k = 0; k < lam.size(); ++k) {
    const double kappa = -lam[k];
    const double outer = ch ? kappa : 1.0;
    const double base = 1.0 + tm * outer * k_symbol(kappa, p);
    if (!(base > 0.0)) {
      std::ostringstream msg;
      msg << "build_operator: dt*M = " << tm << " exceeds the solvability bound on this grid";
      throw UsageError(msg.str());
    }
    inv[k] = 1.0 / (base + tm * outer * mean_quarter_w);
    bound = std::max(bound, std::abs(base) + tm * outer * (std::abs(k_symbol(kappa, p)) + max_quarter_w));
  }

  LinearOperator op(grid, std::move(apply), !(ch && eq), std::string(to_string(scheme)));
  op.set_norm_bound(bound);
  if (with_preconditioner) op.set_preconditioner(std::make_shared<const SpectralMultiplier>(grid, std::move(inv)));
  return op;
}

// ---------------------------------------------------------------------------
// Krylov solvers

namespace {

void precondition(const LinearOperator& A, bool use, const Field& r, Field& z) {
  if (use && A.preconditioner()) {
    A.preconditioner()->apply(r, z);
  } else {
    std::copy(r.values().begin(), r.values().end(), z.values().begin());
  }
}

double rounding_floor(const LinearOperator& A, const Field& x) {
  return kFloorFactor * std::numeric_limits<double>::epsilon() * A.norm_bound() * norm(x);
}

double true_residual(const LinearOperator& A, const Field& x, const Field& b, Field& r) {
  A.apply(x, r);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] - r[k];
  return norm(r);
}

#ifndef NDEBUG
void probe_symmetry(const LinearOperator& A) {
  const GridSpec& g = A.grid();
  Field f(g), h(g);
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = std::sin(0.7 * static_cast<double>(k) + 0.3);
    h[k] = std::cos(1.3 * static_cast<double>(k) + 0.1);
  }
  const double lhs = inner(A(f), h);
  const double rhs = inner(f, A(h));
  const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  if (std::abs(lhs - rhs) > 1e-9 * scale) throw UsageError("solve_spd: operator is not self-adjoint");
}
#endif

}  // namespace

std::pair<Field, SolveReport> solve_spd(const LinearOperator& A, const Field& b, const SolverOptions& opts) {
  const GridSpec& g = A.grid();
  require_same_grid(g, b.grid(), "solve_spd");
#ifndef NDEBUG
  probe_symmetry(A);
#endif
  SolveReport rep;
  Field x(g);
  const double bnorm = norm(b);
  if (bnorm == 0.0) return {std::move(x), rep};
  const double target = opts.tol * bnorm;
  const int maxit = opts.max_iterations(g);

  Field r(g), z(g), d(g), ad(g);
  double rnorm = true_residual(A, x, b, r);
  for (int restart = 0; restart <= kMaxRestarts && rnorm > std::max(target, rounding_floor(A, x)); ++restart) {
    precondition(A, opts.spectral_preconditioner, r, z);
    std::copy(z.values().begin(), z.values().end(), d.values().begin());
    double rz = inner(r, z);
    for (int it = 0; it < maxit; ++it) {
      A.apply(d, ad);
      const double dad = inner(d, ad);
      if (!(dad > 0.0)) break;
      const double step = rz / dad;
      x.axpy(step, d);
      r.axpy(-step, ad);
      ++rep.iterations;
      if (norm(r) <= std::max(target, rounding_floor(A, x))) break;
      precondition(A, opts.spectral_preconditioner, r, z);
      const double rz_new = inner(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = z[k] + beta * d[k];
    }
    rnorm = true_residual(A, x, b, r);
  }
  rep.final_residual = rnorm / bnorm;
  rep.converged = rnorm <= std::max(target, rounding_floor(A, x));
  return {std::move(x), rep};
}

std::pair<Field, SolveReport> solve_nonsymmetric(const LinearOperator& A, const Field& b,
                                                 const SolverOptions& opts) {
  const GridSpec& g = A.grid();
  require_same_grid(g, b.grid(), "solve_nonsymmetric");
  SolveReport rep;
  Field x(g);
  const double bnorm = norm(b);
  if (bnorm == 0.0) return {std::move(x), rep};
  const double target = opts.tol * bnorm;
  const int maxit = opts.max_iterations(g);

  Field r(g), rhat(g), pv(g), v(g), s(g), t(g), ph(g), sh(g);
  double rnorm = true_residual(A, x, b, r);
  for (int restart = 0; restart <= kMaxRestarts && rnorm > std::max(target, rounding_floor(A, x)); ++restart) {
    std::copy(r.values().begin(), r.values().end(), rhat.values().begin());
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::fill(v.values().begin(), v.values().end(), 0.0);
    std::fill(pv.values().begin(), pv.values().end(), 0.0);
    for (int it = 0; it < maxit; ++it) {
      const double rho_new = inner(rhat, r);
      if (rho_new == 0.0 || omega == 0.0) break;
      const double beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = r[k] + beta * (pv[k] - omega * v[k]);
      precondition(A, opts.spectral_preconditioner, pv, ph);
      A.apply(ph, v);
      const double rv = inner(rhat, v);
      if (rv == 0.0) break;
      alpha = rho / rv;
      for (std::size_t k = 0; k < s.size(); ++k) s[k] = r[k] - alpha * v[k];
      ++rep.iterations;
      if (norm(s) <= std::max(target, rounding_floor(A, x))) {
        x.axpy(alpha, ph);
        break;
      }
      precondition(A, opts.spectral_preconditioner, s, sh);
      A.apply(sh, t);
      const double tt = inner(t, t);
      omega = tt > 0.0 ? inner(t, s) / tt : 0.0;
      x.axpy(alpha, ph);
      x.axpy(omega, sh);
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = s[k] - omega * t[k];
      if (norm(r) <= std::max(target, rounding_floor(A, x))) break;
    }
    rnorm = true_residual(A, x, b, r);
  }
  rep.final_residual = rnorm / bnorm;
  rep.converged = rnorm <= std::max(target, rounding_floor(A, x));
  return {std::move(x), rep};
}

std::pair<Field, SolveReport> solve(const LinearOperator& A, const Field& b, const SolverOptions& opts) {
  return A.symmetric() ? solve_spd(A, b, opts) : solve_nonsymmetric(A, b, opts);
}

// ---------------------------------------------------------------------------
// Bordered systems

Field BorderedSystem::apply(const Field& x) const {
  Field out = A(x);
  for (const Coupling& cp : couplings) out.axpy(inner(cp.c, x), cp.d);
  return out;
}

Field BorderedSystem::residual(const Field& x) const {
  Field r = b;
  r -= apply(x);
  return r;
}

namespace {

// Partial-pivot Gaussian elimination on a small dense system.
std::vector<double> dense_solve(std::vector<double> m, std::vector<double> rhs, int n) {
  double scale = 0.0;
  for (double v : m) scale = std::max(scale, std::abs(v));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(m[row * n + col]) > std::abs(m[piv * n + col])) piv = row;
    }
    const double pv = m[piv * n + col];
    if (!(std::abs(pv) > 1e-12 * scale)) {
      throw SingularSystemError("solve_bordered: reduced coupling matrix is singular", pv);
    }
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(m[col * n + k], m[piv * n + k]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (int row = col + 1; row < n; ++row) {
      const double f = m[row * n + col] / pv;
      for (int k = col; k < n; ++k) m[row * n + k] -= f * m[col * n + k];
      rhs[row] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (int row = n - 1; row >= 0; --row) {
    double s = rhs[row];
    for (int k = row + 1; k < n; ++k) s -= m[row * n + k] * x[k];
    x[row] = s / m[row * n + row];
  }
  return x;
}

}  // namespace

BorderedSolution solve_bordered(const BorderedSystem& sys, const SolverOptions& opts) {
  const GridSpec& g = sys.A.grid();
  require_same_grid(g, sys.b.grid(), "solve_bordered");
  const int k = static_cast<int>(sys.couplings.size());
  SolveReport rep;

  std::vector<Field> xs;
  xs.reserve(k);
  for (const Coupling& cp : sys.couplings) {
    require_same_grid(g, cp.c.grid(), "solve_bordered");
    require_same_grid(g, cp.d.grid(), "solve_bordered");
    auto [xj, rj] = solve(sys.A, cp.d, opts);
    rep.iterations += rj.iterations;
    rep.converged = rep.converged && rj.converged;
    xs.push_back(std::move(xj));
  }
  std::vector<double> gm(static_cast<std::size_t>(k) * k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) gm[i * k + j] = (i == j ? 1.0 : 0.0) + inner(sys.couplings[i].c, xs[j]);
  }

  // One reduction of A x + sum <c_i, x> d_i = rhs, reusing the x_j.
  auto reduce = [&](const Field& rhs) {
    auto [y, ry] = solve(sys.A, rhs, opts);
    rep.iterations += ry.iterations;
    if (k > 0) {
      std::vector<double> cy(k);
      for (int i = 0; i < k; ++i) cy[i] = inner(sys.couplings[i].c, y);
      const std::vector<double> s = dense_solve(gm, cy, k);
      for (int j = 0; j < k; ++j) y.axpy(-s[j], xs[j]);
    }
    return y;
  };

  Field x = reduce(sys.b);
  const double bnorm = norm(sys.b);
  double rnorm = norm(sys.residual(x));
  // The rank-one terms add |c_i| |d_i| to the bound on the bordered operator.
  double border = 0.0;
  for (const Coupling& cp : sys.couplings) border += norm(cp.c) * norm(cp.d);
  auto accept = [&](const Field& xv) {
    const double floor = sys.A.norm_bound() > 0.0
                             ? kFloorFactor * std::numeric_limits<double>::epsilon() * (sys.A.norm_bound() + border) * norm(xv)
                             : 0.0;
    return std::max(opts.tol * bnorm, floor);
  };
  for (int pass = 0; pass < kMaxRestarts && bnorm > 0.0 && rnorm > accept(x); ++pass) {
    x += reduce(sys.residual(x));
    rnorm = norm(sys.residual(x));
  }
  rep.final_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  rep.converged = bnorm > 0.0 ? rnorm <= accept(x) : rnorm == 0.0;

  BorderedSolution sol{std::move(x), {}, rep};
  for (const Coupling& cp : sys.couplings) sol.scalars.push_back(inner(cp.c, sol.x));
  return sol;
}

}  // namespace pfcflow
