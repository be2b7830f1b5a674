#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

// Brute-force reference solvers the analytic code is checked against. Slow
// and simple on purpose; none of them share logic with the library.
namespace oracle {

inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, int iters = 200) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

// Dense scan plus local golden refinement; handles nonconvex objectives.
inline double line_min(const std::function<double(double)>& f, double lo,
                       double hi, int scan = 4001) {
  double best = lo, fb = f(lo);
  for (int i = 1; i < scan; ++i) {
    double x = lo + (hi - lo) * i / (scan - 1);
    double fx = f(x);
    if (fx < fb) {
      fb = fx;
      best = x;
    }
  }
  double w = (hi - lo) / (scan - 1);
  double r = golden_min(f, std::max(lo, best - 2 * w),
                        std::min(hi, best + 2 * w));
  return f(r) < fb ? r : best;
}

// Cyclic coordinate descent over a box [0, upper] with multiple starts.
inline Eigen::VectorXd box_cd_min(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& upper,
    const std::vector<Eigen::VectorXd>& starts, int sweeps = 40) {
  Eigen::VectorXd best;
  double fbest = std::numeric_limits<double>::infinity();
  for (const Eigen::VectorXd& s0 : starts) {
    Eigen::VectorXd s = s0;
    for (int it = 0; it < sweeps; ++it)
      for (int m = 0; m < s.size(); ++m) {
        auto g = [&](double v) {
          Eigen::VectorXd u = s;
          u(m) = v;
          return f(u);
        };
        s(m) = line_min(g, 0.0, upper(m), 801);
      }
    double fs = f(s);
    if (fs < fbest) {
      fbest = fs;
      best = s;
    }
  }
  return best;
}

// Best point of the form r * w / ||w||_F for a penalty of the block norm.
inline Eigen::MatrixXd prox_radial(const Eigen::MatrixXd& w, double t,
                                   const std::function<double(double)>& pen) {
  double x = w.norm();
  if (x == 0.0) return w;
  auto f = [&](double r) { return (r - x) * (r - x) / (2.0 * t) + pen(r); };
  double r = line_min(f, 0.0, x * 1.0000001, 8001);
  if (f(0.0) < f(r)) r = 0.0;
  if (f(x) < f(r)) r = x;
  return (r / x) * w;
}

// Best column-colinear point for a penalty of the vector of column norms.
inline Eigen::MatrixXd prox_columnwise(
    const Eigen::MatrixXd& w, double t,
    const std::function<double(const Eigen::VectorXd&)>& pen) {
  int nm = (int)w.cols();
  Eigen::VectorXd x(nm);
  for (int m = 0; m < nm; ++m) x(m) = w.col(m).norm();
  auto f = [&](const Eigen::VectorXd& s) {
    return (s - x).squaredNorm() / (2.0 * t) + pen(s);
  };
  std::vector<Eigen::VectorXd> starts = {x, Eigen::VectorXd::Zero(nm),
                                         (0.5 * x).eval()};
  Eigen::VectorXd s = box_cd_min(f, x, starts);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(w.rows(), nm);
  for (int m = 0; m < nm; ++m)
    if (x(m) > 0.0) z.col(m) = (s(m) / x(m)) * w.col(m);
  return z;
}

inline double prox_objective(
    const Eigen::MatrixXd& w, const Eigen::MatrixXd& z, double t,
    const std::function<double(const Eigen::MatrixXd&)>& pen) {
  return (z - w).squaredNorm() / (2.0 * t) + pen(z);
}

inline Eigen::MatrixXd fd_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& at, double h = 1e-6) {
  Eigen::MatrixXd g(at.rows(), at.cols());
  Eigen::MatrixXd x = at;
  for (int i = 0; i < at.rows(); ++i)
    for (int j = 0; j < at.cols(); ++j) {
      x(i, j) = at(i, j) + h;
      double fp = f(x);
      x(i, j) = at(i, j) - h;
      double fm = f(x);
      x(i, j) = at(i, j);
      g(i, j) = (fp - fm) / (2.0 * h);
    }
  return g;
}

// Weighted lasso 1/(2n)||y - X b||^2 + lambda sum_j w_j |b_j| by cyclic
// coordinate descent.
inline Eigen::VectorXd cd_lasso(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y, double lambda,
                                const Eigen::VectorXd& w,
                                int max_sweeps = 100000, double tol = 1e-14) {
  int n = (int)x.rows(), p = (int)x.cols();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = y;
  Eigen::VectorXd xsq(p);
  for (int j = 0; j < p; ++j) xsq(j) = x.col(j).squaredNorm() / n;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (int j = 0; j < p; ++j) {
      if (xsq(j) == 0.0) continue;
      double rho = x.col(j).dot(r) / n + xsq(j) * b(j);
      double thr = lambda * w(j);
      double bj = 0.0;
      if (rho > thr)
        bj = (rho - thr) / xsq(j);
      else if (rho < -thr)
        bj = (rho + thr) / xsq(j);
      if (bj != b(j)) {
        r += x.col(j) * (b(j) - bj);
        moved = std::max(moved, std::abs(bj - b(j)));
        b(j) = bj;
      }
    }
    if (moved < tol) break;
  }
  return b;
}

}  // namespace oracle
