#pragma once

// Restarted GMRES for real linear systems given only as a matrix-free operator.

#include <cmath>
#include <vector>

namespace hele_shaw {

struct KrylovResult {
  std::vector<double> x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct KrylovOptions {
  double tolerance = 1e-12;
  int max_iterations = 200;
  int restart = 60;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace detail

/// Solves A x = b. `apply(v)` returns A v. x0 may be empty.
template <class Apply>
KrylovResult gmres(Apply&& apply, const std::vector<double>& b, std::vector<double> x0,
                   const KrylovOptions& opt = {}) {
  using detail::dot;
  using detail::norm2;
  const size_t n = b.size();
  KrylovResult out;
  out.x = x0.empty() ? std::vector<double>(n, 0.0) : std::move(x0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    out.x.assign(n, 0.0);
    out.converged = true;
    return out;
  }

  auto residual = [&](const std::vector<double>& x) {
    std::vector<double> r = apply(x);
    for (size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return r;
  };

  std::vector<double> r = residual(out.x);
  double beta = norm2(r);
  out.relative_residual = beta / bnorm;
  if (out.relative_residual <= opt.tolerance) {
    out.converged = true;
    return out;
  }

  const int m = opt.restart;
  while (out.iterations < opt.max_iterations) {
    std::vector<std::vector<double>> V(m + 1, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    for (size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    g[0] = beta;
    int k = 0;
    for (; k < m && out.iterations < opt.max_iterations; ++k) {
      ++out.iterations;
      std::vector<double> w = apply(V[k]);
      // modified Gram-Schmidt with one reorthogonalisation pass
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j <= k; ++j) {
          const double h = dot(w, V[j]);
          H[j][k] += h;
          for (size_t i = 0; i < n; ++i) w[i] -= h * V[j][i];
        }
      H[k + 1][k] = norm2(w);
      if (H[k + 1][k] > 0.0)
        for (size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / H[k + 1][k];
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * H[j][k] + sn[j] * H[j + 1][k];
        H[j + 1][k] = -sn[j] * H[j][k] + cs[j] * H[j + 1][k];
        H[j][k] = t;
      }
      const double denom = std::hypot(H[k][k], H[k + 1][k]);
      cs[k] = denom == 0.0 ? 1.0 : H[k][k] / denom;
      sn[k] = denom == 0.0 ? 0.0 : H[k + 1][k] / denom;
      H[k][k] = denom;
      H[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) / bnorm <= opt.tolerance || H[k][k] == 0.0) {
        ++k;
        break;
      }
    }
    std::vector<double> y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H[i][j] * y[j];
      y[i] = H[i][i] == 0.0 ? 0.0 : s / H[i][i];
    }
    for (int j = 0; j < k; ++j)
      for (size_t i = 0; i < n; ++i) out.x[i] += y[j] * V[j][i];
    r = residual(out.x);
    beta = norm2(r);
    out.relative_residual = beta / bnorm;
    if (out.relative_residual <= opt.tolerance) {
      out.converged = true;
      return out;
    }
    if (k == 0) break;
  }
  return out;
}

}  // namespace hele_shaw
