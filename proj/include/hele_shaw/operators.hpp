#pragma once

// Boundary-integral operators on a closed curve z(alpha): the Hilbert
// commutator, the desingularised kernel K = K1 + K2, and G, G1, G2, F.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "hele_shaw/errors.hpp"
#include "hele_shaw/geometry.hpp"
#include "hele_shaw/spectral.hpp"

namespace hele_shaw {

namespace detail {

// 2^{2n} B_{2n} / (2n)! for n = 1..12.
inline const std::array<double, 12>& bernoulli_series() {
  static const std::array<double, 12> coeffs = [] {
    const std::array<double, 12> b2n = {1.0 / 6,          -1.0 / 30,         1.0 / 42,
                                        -1.0 / 30,        5.0 / 66,          -691.0 / 2730,
                                        7.0 / 6,          -3617.0 / 510,     43867.0 / 798,
                                        -174611.0 / 330,  854513.0 / 138,    -236364091.0 / 2730};
    std::array<double, 12> c{};
    double fact = 1.0, pow4 = 1.0;
    for (int n = 1; n <= 12; ++n) {
      fact *= (2.0 * n - 1) * (2.0 * n);
      pow4 *= 4.0;
      c[n - 1] = pow4 * b2n[n - 1] / fact;
    }
    return c;
  }();
  return coeffs;
}

inline cplx regular_part_series(cplx w, bool alternating) {
  const auto& c = bernoulli_series();
  const cplx w2 = w * w;
  cplx term = w, sum = 0.0;
  for (int n = 1; n <= 12; ++n) {
    const double sign = (alternating && n % 2 == 1) ? -1.0 : 1.0;
    sum += sign * c[n - 1] * term;
    term *= w2;
  }
  return sum;
}

}  // namespace detail

/// l1(w) = coth(w) - 1/w.
inline cplx l1(cplx w) {
  if (std::abs(w) < 0.5) return detail::regular_part_series(w, false);
  return 1.0 / std::tanh(w) - 1.0 / w;
}

/// l2(w) = cot(w) - 1/w.
inline cplx l2(cplx w) {
  if (std::abs(w) < 0.5) return detail::regular_part_series(w, true);
  return 1.0 / std::tan(w) - 1.0 / w;
}

/// H(psi f) - psi H(f).
inline PeriodicField commutator_h(const PeriodicField& psi, const PeriodicField& f,
                                  bool dealiased = true) {
  if (dealiased) return hilbert(product(psi, f)) - product(psi, hilbert(f));
  return hilbert(pointwise(psi, f)) - pointwise(psi, hilbert(f));
}

/// Curve data and quadrature tables for the kernel operators.
class KernelContext {
 public:
  static constexpr int kTableLimit = 512;

  KernelContext(PeriodicField z, PeriodicField z_alpha, PeriodicField z_alphalpha, double beta)
      : z_(std::move(z)),
        z_alpha_(std::move(z_alpha)),
        z_alphalpha_(std::move(z_alphalpha)),
        beta_(beta) {
    n_ = z_.size();
    if (beta_ < 0.0) throw ConfigError("beta must be nonnegative");
    cot_.assign(n_, 0.0);
    for (int m = 1; m < n_; ++m) cot_[m] = 1.0 / std::tan(kPi * m / n_);
    inv_za_ = PeriodicField::from_values(
        [&] {
          std::vector<cplx> v(n_);
          for (int j = 0; j < n_; ++j) v[j] = 1.0 / z_alpha_.value(j);
          return v;
        }(),
        false);
    if (beta_ > 0.0) check_guard();
    if (n_ <= kTableLimit) {
      k1_.resize(static_cast<size_t>(n_) * n_);
      if (beta_ > 0.0) k2_.resize(static_cast<size_t>(n_) * n_);
      for (int i = 0; i < n_; ++i) {
        fill_k1_row(i, &k1_[static_cast<size_t>(i) * n_]);
        if (beta_ > 0.0) fill_k2_row(i, &k2_[static_cast<size_t>(i) * n_]);
      }
    }
  }

  explicit KernelContext(const InterfaceGeometry& g, double beta)
      : KernelContext(g.z, g.z_alpha, g.z_alphalpha, beta) {}

  int size() const { return n_; }
  double beta() const { return beta_; }
  const PeriodicField& z() const { return z_; }
  const PeriodicField& z_alpha() const { return z_alpha_; }
  const PeriodicField& z_alphalpha() const { return z_alphalpha_; }
  const PeriodicField& inv_z_alpha() const { return inv_za_; }

  /// Regularised K1 integrand 1/(z - z') - cot((a - a')/2) / (2 z_a(a')).
  cplx k1_integrand(int i, int j) const {
    if (i == j) {
      const cplx za = z_alpha_.value(i);
      return -z_alphalpha_.value(i) / (2.0 * za * za);
    }
    const int m = ((i - j) % n_ + n_) % n_;
    return 1.0 / (z_.value(i) - z_.value(j)) - cot_[m] / (2.0 * z_alpha_.value(j));
  }

  /// Smooth K2 integrand (beta/4) l1(beta (z - z')/4) - (beta/4) tanh(beta (z - z'*)/4).
  cplx k2_integrand(int i, int j) const {
    const double q = 0.25 * beta_;
    const cplx zi = z_.value(i), zj = z_.value(j);
    return q * l1(q * (zi - zj)) - q * std::tanh(q * (zi - std::conj(zj)));
  }

  /// sum_j W(i,j) f_j with quadrature weight (2 pi / N) / (2 pi i) folded in.
  PeriodicField apply_k1(const PeriodicField& f) const { return apply_table(f, k1_, false); }
  PeriodicField apply_k2(const PeriodicField& f) const {
    if (beta_ == 0.0) return PeriodicField::zeros(n_, false);
    return apply_table(f, k2_, true);
  }

 private:
  void check_guard() const {
    double worst = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        worst = std::max(worst, std::abs(z_.value(i) - z_.value(j)));
        worst = std::max(worst, std::abs(z_.value(i) - std::conj(z_.value(j))));
      }
    if (beta_ * worst > kPi)
      throw GeometryFailure("beta * max|z - z'| = " + std::to_string(beta_ * worst) +
                            " exceeds pi");
  }

  void fill_k1_row(int i, cplx* row) const {
    const cplx w = 1.0 / (kI * static_cast<double>(n_));
    for (int j = 0; j < n_; ++j) row[j] = w * k1_integrand(i, j);
  }
  void fill_k2_row(int i, cplx* row) const {
    const cplx w = 1.0 / (kI * static_cast<double>(n_));
    for (int j = 0; j < n_; ++j) row[j] = w * k2_integrand(i, j);
  }

  PeriodicField apply_table(const PeriodicField& f, const std::vector<cplx>& table,
                            bool second) const {
    std::vector<cplx> out(n_, 0.0);
    std::vector<cplx> row(n_);
    const auto& fv = f.values();
    for (int i = 0; i < n_; ++i) {
      const cplx* r;
      if (!table.empty()) {
        r = &table[static_cast<size_t>(i) * n_];
      } else {
        if (second) fill_k2_row(i, row.data());
        else fill_k1_row(i, row.data());
        r = row.data();
      }
      cplx s = 0.0;
      for (int j = 0; j < n_; ++j) s += r[j] * fv[j];
      out[i] = s;
    }
    return PeriodicField::from_values(std::move(out), false);
  }

  int n_ = 0;
  PeriodicField z_, z_alpha_, z_alphalpha_, inv_za_;
  double beta_ = 0.0;
  std::vector<double> cot_;
  std::vector<cplx> k1_, k2_;
};

inline PeriodicField apply_K1(const KernelContext& ctx, const PeriodicField& f) {
  return ctx.apply_k1(f);
}
inline PeriodicField apply_K2(const KernelContext& ctx, const PeriodicField& f) {
  return ctx.apply_k2(f);
}
inline PeriodicField apply_K(const KernelContext& ctx, const PeriodicField& f) {
  if (ctx.beta() == 0.0) return ctx.apply_k1(f);
  return ctx.apply_k1(f) + ctx.apply_k2(f);
}

/// z_a [H, 1/z_a] gamma. Products are not filtered here so that the
/// commutator and K1 discretise the same singular integral.
inline PeriodicField hilbert_commutator_term(const KernelContext& ctx, const PeriodicField& gamma) {
  return pointwise(ctx.z_alpha(), commutator_h(ctx.inv_z_alpha(), gamma, false));
}

inline PeriodicField apply_G1(const KernelContext& ctx, const PeriodicField& gamma) {
  return hilbert_commutator_term(ctx, gamma) +
         (2.0 * kI) * pointwise(ctx.z_alpha(), ctx.apply_k1(gamma));
}

inline PeriodicField apply_G2(const KernelContext& ctx, const PeriodicField& gamma) {
  return (2.0 * kI) * pointwise(ctx.z_alpha(), ctx.apply_k2(gamma));
}

inline PeriodicField apply_G(const KernelContext& ctx, const PeriodicField& gamma) {
  return hilbert_commutator_term(ctx, gamma) +
         (2.0 * kI) * pointwise(ctx.z_alpha(), apply_K(ctx, gamma));
}

/// F gamma = Re(G gamma / i) = Im(G gamma).
inline PeriodicField apply_F(const KernelContext& ctx, const PeriodicField& gamma) {
  return apply_G(ctx, gamma).imag_part();
}

}  // namespace hele_shaw
