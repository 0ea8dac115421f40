#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace polyscale {

// Tiny dense two-phase simplex:  max c.x  s.t.  A x <= b,  x >= 0.
// Bland's rule, so it cannot cycle. Problem sizes here are a few dozen
// rows and at most ~8 columns, so the tableau form is fine.
enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

inline LPResult solve_lp(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const double eps = 1e-11;

  // Tableau columns: [x (n) | slacks (m) | artificials (k) | rhs].
  // Slack row i: A_i x + s_i = b_i. Rows with b_i < 0 are negated and get
  // an artificial basic variable.
  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (b(i) < 0) art_rows.push_back(i);
  const int k = static_cast<int>(art_rows.size());
  const int cols = n + m + k + 1;

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, cols);
  std::vector<int> basis(m);
  {
    int a = 0;
    for (int i = 0; i < m; ++i) {
      double sgn = (b(i) < 0) ? -1.0 : 1.0;
      T.row(i).head(n) = sgn * A.row(i);
      T(i, n + i) = sgn;  // slack
      T(i, cols - 1) = sgn * b(i);
      if (b(i) < 0) {
        T(i, n + m + a) = 1.0;
        basis[i] = n + m + a;
        ++a;
      } else {
        basis[i] = n + i;
      }
    }
  }

  auto pivot = [&](int pr, int pc) {
    T.row(pr) /= T(pr, pc);
    for (int i = 0; i < m; ++i) {
      if (i != pr && std::abs(T(i, pc)) > 0) T.row(i) -= T(i, pc) * T.row(pr);
    }
    basis[pr] = pc;
  };

  // Runs simplex on the current tableau for objective row `obj`
  // (reduced costs for a maximization; obj has `cols` entries, last = value).
  auto run = [&](Eigen::RowVectorXd& obj, int usable_cols) -> bool {
    for (;;) {
      int pc = -1;
      for (int j = 0; j < usable_cols; ++j) {
        if (obj(j) > eps) { pc = j; break; }  // Bland: first improving column
      }
      if (pc < 0) return true;  // optimal
      int pr = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (T(i, pc) > eps) {
          double ratio = T(i, cols - 1) / T(i, pc);
          if (ratio < best - eps || (ratio < best + eps && (pr < 0 || basis[i] < basis[pr]))) {
            best = ratio;
            pr = i;
          }
        }
      }
      if (pr < 0) return false;  // unbounded
      pivot(pr, pc);
      obj -= obj(pc) * T.row(pr);
    }
  };

  LPResult res;
  if (k > 0) {
    // Phase 1: maximize -sum(artificials).
    Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(cols);
    for (int j = n + m; j < n + m + k; ++j) obj(j) = -1.0;
    // Price out the basic artificials.
    for (int i = 0; i < m; ++i)
      if (basis[i] >= n + m) obj += T.row(i);
    if (!run(obj, n + m + k)) return res;  // cannot happen: phase 1 bounded
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
      if (basis[i] >= n + m) art_sum += T(i, cols - 1);
    if (art_sum > 1e-8) {
      res.status = LPStatus::Infeasible;
      return res;
    }
    // Drive any artificial still in the basis out (degenerate at zero).
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= n + m) {
        int pc = -1;
        for (int j = 0; j < n + m; ++j)
          if (std::abs(T(i, j)) > eps) { pc = j; break; }
        if (pc >= 0) pivot(i, pc);
      }
    }
  }

  // Phase 2.
  Eigen::RowVectorXd obj = Eigen::RowVectorXd::Zero(cols);
  obj.head(n) = c.transpose();
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) obj -= obj(basis[i]) * T.row(i);
  if (!run(obj, n + m)) {
    res.status = LPStatus::Unbounded;
    return res;
  }

  res.status = LPStatus::Optimal;
  res.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) res.x(basis[i]) = T(i, cols - 1);
  res.value = c.dot(res.x);
  return res;
}

}  // namespace polyscale
