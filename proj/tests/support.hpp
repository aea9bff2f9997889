#pragma once

#include <Eigen/Dense>

#include <random>

#include "pfcflow/grid.hpp"
#include "pfcflow/linsolve.hpp"

namespace pfcflow::test {

inline Field random_field(const GridSpec& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field f(g);
  for (double& v : f.values()) v = u(rng);
  return f;
}

inline Field unit_field(const GridSpec& g, std::size_t k) {
  Field e(g);
  e[k] = 1.0;
  return e;
}

/// Column k is A applied to the k-th unit field.
template <class Op>
Eigen::MatrixXd probe(const GridSpec& g, const Op& op) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Field col = op(unit_field(g, static_cast<std::size_t>(k)));
    for (Eigen::Index r = 0; r < n; ++r) m(r, k) = col[static_cast<std::size_t>(r)];
  }
  return m;
}

inline Eigen::VectorXd to_vec(const Field& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(f.size()));
}

inline Field to_field(const GridSpec& g, const Eigen::VectorXd& v) {
  return Field(g, std::vector<double>(v.data(), v.data() + v.size()));
}

/// Dense matrix of x -> A x + sum_i <c_i, x> d_i.
inline Eigen::MatrixXd dense_bordered(const BorderedSystem& sys) {
  const GridSpec& g = sys.A.grid();
  Eigen::MatrixXd m = probe(g, sys.A);
  for (const Coupling& cp : sys.couplings) {
    m += to_vec(cp.d) * (g.cell_area() * to_vec(cp.c)).transpose();
  }
  return m;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace pfcflow::test
