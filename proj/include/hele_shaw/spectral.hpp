#pragma once

// Fourier-space core for 2*pi-periodic fields sampled on a uniform grid.
//
// Coefficients are kept in FFT order (k = 0..N/2-1, then -N/2..-1) with the
// normalisation f(alpha) = sum_k fhat(k) exp(i k alpha). The Nyquist mode is
// always dropped, so any field is represented by |k| <= N/2 - 1.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hele_shaw {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline double grid_point(int j, int n) { return kTwoPi * j / n; }

inline int sgn(int k) { return (k > 0) - (k < 0); }

namespace detail {

class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n) {
    buffer_ = fftw_alloc_complex(static_cast<size_t>(n));
    if (buffer_ == nullptr) throw std::bad_alloc();
    // Planner calls are not thread safe; execution with a private buffer is.
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_1d(n, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(buffer_);
  }

  // values -> coefficients, including the 1/N factor.
  void analyze(std::span<const cplx> in, std::span<cplx> out) const {
    run(forward_, in, out, 1.0 / n_);
  }
  // coefficients -> values.
  void synthesize(std::span<const cplx> in, std::span<cplx> out) const {
    run(backward_, in, out, 1.0);
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  void run(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out,
           double scale) const {
    auto* buf = reinterpret_cast<cplx*>(buffer_);
    std::copy(in.begin(), in.end(), buf);
    fftw_execute(plan);
    for (int j = 0; j < n_; ++j) out[j] = buf[j] * scale;
  }

  int n_;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

inline const FftPlan& fft_plan(int n) {
  thread_local std::map<int, std::unique_ptr<FftPlan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
  return *it->second;
}

}  // namespace detail

/// A real- or complex-valued 2*pi-periodic function held simultaneously as
/// grid samples and Fourier coefficients.
class PeriodicField {
 public:
  PeriodicField() = default;

  static PeriodicField from_values(std::vector<cplx> values, bool real) {
    const int n = static_cast<int>(values.size());
    check_size(n);
    PeriodicField f;
    f.real_ = real;
    f.coeffs_.resize(n);
    detail::fft_plan(n).analyze(values, f.coeffs_);
    f.values_ = std::move(values);
    f.normalize();
    return f;
  }

  static PeriodicField from_real_values(std::span<const double> values) {
    std::vector<cplx> v(values.begin(), values.end());
    return from_values(std::move(v), true);
  }

  /// Coefficients in FFT order.
  static PeriodicField from_coeffs(std::vector<cplx> coeffs, bool real) {
    const int n = static_cast<int>(coeffs.size());
    check_size(n);
    PeriodicField f;
    f.real_ = real;
    f.coeffs_ = std::move(coeffs);
    f.normalize();
    return f;
  }

  template <class Fn>
  static PeriodicField sample(int n, Fn&& fn, bool real) {
    check_size(n);
    std::vector<cplx> v(n);
    for (int j = 0; j < n; ++j) v[j] = cplx(fn(grid_point(j, n)));
    return from_values(std::move(v), real);
  }

  static PeriodicField zeros(int n, bool real = true) {
    check_size(n);
    return from_coeffs(std::vector<cplx>(n, 0.0), real);
  }

  /// amplitude * exp(i k alpha); real fields get the conjugate partner added.
  static PeriodicField mode(int n, int k, cplx amplitude, bool real = false) {
    check_size(n);
    std::vector<cplx> c(n, 0.0);
    c[index(k, n)] += amplitude;
    if (real) c[index(-k, n)] += std::conj(amplitude);
    return from_coeffs(std::move(c), real);
  }

  int size() const { return static_cast<int>(values_.size()); }
  bool empty() const { return values_.empty(); }
  bool is_real() const { return real_; }
  int max_mode() const { return size() / 2 - 1; }

  const std::vector<cplx>& values() const { return values_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  cplx value(int j) const { return values_[j]; }

  /// fhat(k); zero outside the resolved band.
  cplx coeff(int k) const {
    const int n = size();
    if (k >= n / 2 || k <= -n / 2) return 0.0;
    return coeffs_[index(k, n)];
  }

  std::vector<double> real_values() const {
    std::vector<double> out(values_.size());
    for (size_t j = 0; j < values_.size(); ++j) out[j] = values_[j].real();
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Evaluates the trigonometric interpolant at an arbitrary point.
  cplx evaluate(double alpha) const {
    cplx s = 0.0;
    for (int k = -max_mode(); k <= max_mode(); ++k)
      s += coeff(k) * std::exp(kI * (k * alpha));
    return real_ ? cplx(s.real(), 0.0) : s;
  }

  /// Applies g(k) = multiplier(k) * fhat(k) for every resolved k.
  template <class Mult>
  PeriodicField apply_multiplier(Mult&& multiplier, bool keeps_real = true) const {
    const int n = size();
    std::vector<cplx> c(n);
    for (int i = 0; i < n; ++i) {
      const int k = wavenumber(i, n);
      c[i] = cplx(multiplier(k)) * coeffs_[i];
    }
    return from_coeffs(std::move(c), real_ && keeps_real);
  }

  PeriodicField real_part() const {
    std::vector<cplx> v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = values_[j].real();
    return from_values(std::move(v), true);
  }
  PeriodicField imag_part() const {
    std::vector<cplx> v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = values_[j].imag();
    return from_values(std::move(v), true);
  }
  PeriodicField conj() const {
    std::vector<cplx> v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = std::conj(values_[j]);
    return from_values(std::move(v), real_);
  }

  /// Grid-value transform, e.g. exp, sin; realness is declared by the caller.
  template <class Fn>
  PeriodicField map_values(Fn&& fn, bool real) const {
    std::vector<cplx> v(values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = cplx(fn(values_[j]));
    return from_values(std::move(v), real);
  }

  friend PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) {
    return combine(a, b, [](cplx x, cplx y) { return x + y; });
  }
  friend PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) {
    return combine(a, b, [](cplx x, cplx y) { return x - y; });
  }
  friend PeriodicField operator-(const PeriodicField& a) {
    return a.scaled(-1.0);
  }
  friend PeriodicField operator*(double s, const PeriodicField& a) { return a.scaled(s); }
  friend PeriodicField operator*(cplx s, const PeriodicField& a) { return a.scaled(s); }

  PeriodicField scaled(cplx s) const {
    PeriodicField out = *this;
    for (auto& v : out.values_) v *= s;
    for (auto& c : out.coeffs_) c *= s;
    if (real_ && s.imag() != 0.0) {
      out.real_ = false;
    }
    return out;
  }

  PeriodicField plus_constant(cplx c) const {
    PeriodicField out = *this;
    for (auto& v : out.values_) v += c;
    out.coeffs_[0] += c;
    if (real_ && c.imag() != 0.0) out.real_ = false;
    return out;
  }

  /// Pointwise product on the grid, no filtering.
  friend PeriodicField pointwise(const PeriodicField& a, const PeriodicField& b) {
    check_same(a, b);
    std::vector<cplx> v(a.values_.size());
    for (size_t j = 0; j < v.size(); ++j) v[j] = a.values_[j] * b.values_[j];
    return from_values(std::move(v), a.real_ && b.real_);
  }

  static int index(int k, int n) { return k >= 0 ? k : k + n; }
  static int wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }

 private:
  static void check_size(int n) {
    if (!is_power_of_two(n) || n < 4)
      throw std::invalid_argument("grid size must be a power of two >= 4");
  }
  static void check_same(const PeriodicField& a, const PeriodicField& b) {
    if (a.size() != b.size()) throw std::invalid_argument("grid size mismatch");
  }

  template <class Op>
  static PeriodicField combine(const PeriodicField& a, const PeriodicField& b, Op op) {
    check_same(a, b);
    PeriodicField out;
    out.real_ = a.real_ && b.real_;
    out.values_.resize(a.values_.size());
    out.coeffs_.resize(a.coeffs_.size());
    for (size_t j = 0; j < out.values_.size(); ++j) {
      out.values_[j] = op(a.values_[j], b.values_[j]);
      out.coeffs_[j] = op(a.coeffs_[j], b.coeffs_[j]);
    }
    return out;
  }

  // Drops the Nyquist mode, enforces conjugate symmetry for real fields and
  // resynthesises the grid values from the coefficients.
  void normalize() {
    const int n = static_cast<int>(coeffs_.size());
    coeffs_[n / 2] = 0.0;
    if (real_) {
      coeffs_[0] = coeffs_[0].real();
      for (int k = 1; k < n / 2; ++k) {
        const cplx avg = 0.5 * (coeffs_[k] + std::conj(coeffs_[n - k]));
        coeffs_[k] = avg;
        coeffs_[n - k] = std::conj(avg);
      }
    }
    values_.resize(n);
    detail::fft_plan(n).synthesize(coeffs_, values_);
    if (real_)
      for (auto& v : values_) v = v.real();
  }

  std::vector<cplx> values_;
  std::vector<cplx> coeffs_;
  bool real_ = true;
};

/// Mode-dependent weights w(sigma, k) used by the weighted Sobolev norm.
struct WeightProfile {
  double sigma = 1.0;
  int cutoff_K = 2;

  explicit WeightProfile(double sigma_value) : sigma(sigma_value) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (sigma >= 1.0) {
      cutoff_K = 2;
    } else {
      // smallest integer >= sqrt(1 + 6/sigma); never below 2
      cutoff_K = std::max(2, static_cast<int>(std::ceil(std::sqrt(1.0 + 6.0 / sigma) - 1e-12)));
    }
  }

  double weight(int k) const {
    const int ak = std::abs(k);
    if (sigma >= 1.0) return 1.0;
    if (ak >= 2 && ak <= cutoff_K) return std::pow(sigma, cutoff_K - ak);
    return 1.0;
  }
};

// ---------------------------------------------------------------------------
// Fourier multipliers

/// Hilbert transform, multiplier -i sgn(k).
inline PeriodicField hilbert(const PeriodicField& f) {
  return f.apply_multiplier([](int k) { return -kI * static_cast<double>(sgn(k)); });
}

/// Lambda = H D, multiplier |k|.
inline PeriodicField lambda_op(const PeriodicField& f) {
  return f.apply_multiplier([](int k) { return static_cast<double>(std::abs(k)); });
}

inline PeriodicField derivative(const PeriodicField& f, int order = 1) {
  if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
  return f.apply_multiplier([order](int k) { return std::pow(kI * static_cast<double>(k), order); });
}

/// Removes every mode with |k| <= n.
inline PeriodicField project_qn(const PeriodicField& f, int n) {
  return f.apply_multiplier([n](int k) { return std::abs(k) <= n ? 0.0 : 1.0; });
}

/// 2/3-rule filter: zeroes |k| > N/3.
inline PeriodicField dealias(const PeriodicField& f) {
  const int kmax = f.size() / 3;
  return f.apply_multiplier([kmax](int k) { return std::abs(k) > kmax ? 0.0 : 1.0; });
}

/// Pointwise product followed by the 2/3-rule filter.
inline PeriodicField product(const PeriodicField& a, const PeriodicField& b) {
  return dealias(pointwise(a, b));
}

/// Antiderivative F(alpha) = int_0^alpha f, split into a periodic part with
/// F_periodic(0) = 0 and a secular term slope * alpha (slope = fhat(0)).
struct AntiDerivative {
  PeriodicField periodic;
  cplx slope = 0.0;

  std::vector<cplx> grid_values() const {
    const int n = periodic.size();
    std::vector<cplx> v(n);
    for (int j = 0; j < n; ++j) v[j] = periodic.value(j) + slope * grid_point(j, n);
    return v;
  }
  cplx at(double alpha) const { return periodic.evaluate(alpha) + slope * alpha; }
};

inline AntiDerivative cumulative_integral(const PeriodicField& f) {
  const int n = f.size();
  std::vector<cplx> c(n, 0.0);
  cplx at_zero = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = PeriodicField::wavenumber(i, n);
    if (k == 0 || k == -n / 2) continue;
    c[i] = f.coeffs()[i] / (kI * static_cast<double>(k));
    at_zero += c[i];
  }
  c[0] = -at_zero;
  AntiDerivative out;
  out.periodic = PeriodicField::from_coeffs(std::move(c), f.is_real());
  out.slope = f.coeff(0);
  return out;
}

// ---------------------------------------------------------------------------
// Norms and inner products

inline double sobolev_norm(const PeriodicField& f, double r) {
  double s = std::norm(f.coeff(0));
  for (int k = 1; k <= f.max_mode(); ++k) {
    const double w = std::pow(static_cast<double>(k), 2.0 * r);
    s += w * (std::norm(f.coeff(k)) + std::norm(f.coeff(-k)));
  }
  return std::sqrt(s);
}

/// Weighted norm over |k| >= 2.
inline double weighted_norm(const PeriodicField& f, const WeightProfile& w, double r) {
  double s = 0.0;
  for (int k = 2; k <= f.max_mode(); ++k) {
    const double wk = w.weight(k);
    const double factor = wk * wk * std::pow(static_cast<double>(k), 2.0 * r);
    s += factor * (std::norm(f.coeff(k)) + std::norm(f.coeff(-k)));
  }
  return std::sqrt(s);
}

/// (v, u)_{w,r} over |k| >= 2.
inline cplx weighted_inner(const PeriodicField& v, const PeriodicField& u,
                           const WeightProfile& w, double r) {
  cplx s = 0.0;
  for (int k = 2; k <= v.max_mode(); ++k) {
    const double wk = w.weight(k);
    const double factor = wk * wk * std::pow(static_cast<double>(k), 2.0 * r);
    s += factor * (std::conj(v.coeff(k)) * u.coeff(k) + std::conj(v.coeff(-k)) * u.coeff(-k));
  }
  return s;
}

/// int_0^{2pi} conj(f) g dalpha by the trapezoid rule.
inline cplx l2_inner(const PeriodicField& f, const PeriodicField& g) {
  cplx s = 0.0;
  for (int j = 0; j < f.size(); ++j) s += std::conj(f.value(j)) * g.value(j);
  return s * (kTwoPi / f.size());
}

/// Grid L2 norm, sqrt(mean |f|^2); matches sobolev_norm(f, 0) by Parseval.
inline double grid_l2_norm(const PeriodicField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return std::sqrt(s / f.size());
}

/// sqrt(int (f^2 + f Lambda f)), equivalent to the H^{1/2} norm for real f.
inline double half_norm(const PeriodicField& f) {
  return std::sqrt(std::max(0.0, (l2_inner(f, f) + l2_inner(f, lambda_op(f))).real()));
}

/// Trapezoid integral over one period.
inline cplx integrate(const PeriodicField& f) { return kTwoPi * f.coeff(0); }

/// (f(alpha) - f(-alpha)) / 2.
inline PeriodicField odd_part(const PeriodicField& f) {
  const int n = f.size();
  std::vector<cplx> c(n);
  for (int i = 0; i < n; ++i) {
    const int k = PeriodicField::wavenumber(i, n);
    c[i] = 0.5 * (f.coeff(k) - f.coeff(-k));
  }
  return PeriodicField::from_coeffs(std::move(c), f.is_real());
}

inline PeriodicField even_part(const PeriodicField& f) { return f - odd_part(f); }

}  // namespace hele_shaw
