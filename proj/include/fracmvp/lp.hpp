#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "error.hpp"

namespace fracmvp {

struct LpResult {
  std::vector<double> x;
  double objective = 0.0;
  int pivots = 0;
};

/// maximize c.x subject to A x <= b with b >= 0 and x free in sign.
/// Dense tableau simplex started from the slack basis (x = 0 is feasible). Free variables are
/// split as x = x+ - x-. Dantzig pricing, switching to Bland's rule after a run of degenerate
/// pivots so the method cannot cycle.
inline LpResult lp_maximize(const std::vector<double>& c, const std::vector<std::vector<double>>& A,
                            const std::vector<double>& b) {
  const std::size_t k = c.size();
  const std::size_t m = A.size();
  if (b.size() != m) throw DomainError("lp: row count mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    if (A[i].size() != k) throw DomainError("lp: column count mismatch");
    if (!(b[i] >= 0.0)) throw DomainError("lp: right-hand side must be nonnegative");
  }
  const std::size_t nv = 2 * k;      // structural columns
  const std::size_t cols = nv + m;   // + slacks; rhs kept separately
  std::vector<double> T(m * cols, 0.0), rhs(b), obj(cols, 0.0);
  std::vector<std::size_t> basis(m);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      T[i * cols + j] = A[i][j];
      T[i * cols + k + j] = -A[i][j];
      scale = std::max(scale, std::abs(A[i][j]));
    }
    T[i * cols + nv + i] = 1.0;
    basis[i] = nv + i;
  }
  for (std::size_t j = 0; j < k; ++j) {
    obj[j] = -c[j];  // reduced costs of the minimization form
    obj[k + j] = c[j];
  }
  const double eps = 1e-11 * std::max(1.0, scale);
  int pivots = 0, degenerate = 0;
  const int max_pivots = static_cast<int>(50 * (m + cols));
  for (;;) {
    const bool bland = degenerate > 50;
    std::size_t enter = cols;
    double best = -eps;
    for (std::size_t j = 0; j < cols; ++j) {
      if (obj[j] < best) {
        enter = j;
        if (bland) break;
        best = obj[j];
      }
    }
    if (enter == cols) break;
    std::size_t leave = m;
    double ratio = INFINITY;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = T[i * cols + enter];
      if (a > eps) {
        const double q = rhs[i] / a;
        if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && leave < m && basis[i] < basis[leave])) {
          ratio = q;
          leave = i;
        }
      }
    }
    if (leave == m) throw NumericalError("lp: objective is unbounded on the constraint set", INFINITY);
    degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
    const double piv = T[leave * cols + enter];
    double* prow = &T[leave * cols];
    for (std::size_t j = 0; j < cols; ++j) prow[j] /= piv;
    rhs[leave] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = T[i * cols + enter];
      if (f == 0.0) continue;
      double* row = &T[i * cols];
      for (std::size_t j = 0; j < cols; ++j) row[j] -= f * prow[j];
      rhs[i] -= f * rhs[leave];
      if (rhs[i] < 0.0) rhs[i] = 0.0;  // roundoff
    }
    const double f = obj[enter];
    for (std::size_t j = 0; j < cols; ++j) obj[j] -= f * prow[j];
    basis[leave] = enter;
    if (++pivots > max_pivots) throw NumericalError("lp: pivot limit reached", static_cast<double>(pivots));
  }
  LpResult res;
  res.x.assign(k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < k) res.x[basis[i]] += rhs[i];
    else if (basis[i] < nv) res.x[basis[i] - k] -= rhs[i];
  }
  res.objective = 0.0;
  for (std::size_t j = 0; j < k; ++j) res.objective += c[j] * res.x[j];
  res.pivots = pivots;
  return res;
}

}  // namespace fracmvp
