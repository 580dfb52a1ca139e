#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace plumeinv {

/// Forward-mode scalar carrying value, gradient, and dense Hessian with
/// respect to up to N independent variables. The Hessian is stored packed
/// (lower triangle, row-major). Used to differentiate the plume forward
/// model through arbitrary compositions, so the same kernel code serves
/// plain evaluation (Scalar = double) and curvature-aware MCMC
/// (Scalar = Dual2<N>).
template <int N>
struct Dual2 {
  static constexpr int kHess = N * (N + 1) / 2;

  double val = 0.0;
  std::array<double, N> grad{};
  std::array<double, kHess> hess{};

  Dual2() = default;
  Dual2(double v) : val(v) {}  // NOLINT: implicit constant lift is intended

  static constexpr int hidx(int i, int j) {  // requires i >= j
    return i * (i + 1) / 2 + j;
  }

  static Dual2 variable(double v, int index) {
    Dual2 d(v);
    d.grad[static_cast<std::size_t>(index)] = 1.0;
    return d;
  }

  Dual2& operator+=(const Dual2& o) {
    val += o.val;
    for (int i = 0; i < N; ++i) grad[i] += o.grad[i];
    for (int i = 0; i < kHess; ++i) hess[i] += o.hess[i];
    return *this;
  }
  Dual2& operator-=(const Dual2& o) {
    val -= o.val;
    for (int i = 0; i < N; ++i) grad[i] -= o.grad[i];
    for (int i = 0; i < kHess; ++i) hess[i] -= o.hess[i];
    return *this;
  }
  Dual2& operator*=(const Dual2& o) { return *this = *this * o; }
  Dual2& operator/=(const Dual2& o) { return *this = *this / o; }

  friend Dual2 operator+(Dual2 a, const Dual2& b) { return a += b; }
  friend Dual2 operator-(Dual2 a, const Dual2& b) { return a -= b; }
  friend Dual2 operator-(const Dual2& a) {
    Dual2 r;
    r.val = -a.val;
    for (int i = 0; i < N; ++i) r.grad[i] = -a.grad[i];
    for (int i = 0; i < kHess; ++i) r.hess[i] = -a.hess[i];
    return r;
  }

  friend Dual2 operator*(const Dual2& a, const Dual2& b) {
    Dual2 r;
    r.val = a.val * b.val;
    for (int i = 0; i < N; ++i) r.grad[i] = a.grad[i] * b.val + a.val * b.grad[i];
    for (int i = 0, k = 0; i < N; ++i)
      for (int j = 0; j <= i; ++j, ++k)
        r.hess[k] = a.hess[k] * b.val + a.grad[i] * b.grad[j] +
                    a.grad[j] * b.grad[i] + a.val * b.hess[k];
    return r;
  }

  friend Dual2 operator*(double s, Dual2 a) {
    a.val *= s;
    for (int i = 0; i < N; ++i) a.grad[i] *= s;
    for (int i = 0; i < kHess; ++i) a.hess[i] *= s;
    return a;
  }
  friend Dual2 operator*(const Dual2& a, double s) { return s * a; }

  friend Dual2 operator/(const Dual2& a, const Dual2& b) {
    return a * inverse(b);
  }
  friend Dual2 operator/(const Dual2& a, double s) { return a * (1.0 / s); }
  friend Dual2 operator/(double s, const Dual2& b) { return s * inverse(b); }

  friend bool operator<(const Dual2& a, const Dual2& b) { return a.val < b.val; }
  friend bool operator>(const Dual2& a, const Dual2& b) { return a.val > b.val; }

  /// Chain rule for a unary map with first/second derivatives f1, f2 at val.
  Dual2 unary(double f0, double f1, double f2) const {
    Dual2 r;
    r.val = f0;
    for (int i = 0; i < N; ++i) r.grad[i] = f1 * grad[i];
    for (int i = 0, k = 0; i < N; ++i)
      for (int j = 0; j <= i; ++j, ++k)
        r.hess[k] = f2 * grad[i] * grad[j] + f1 * hess[k];
    return r;
  }

  friend Dual2 inverse(const Dual2& a) {
    const double iv = 1.0 / a.val;
    return a.unary(iv, -iv * iv, 2.0 * iv * iv * iv);
  }
  friend Dual2 exp(const Dual2& a) {
    const double e = std::exp(a.val);
    return a.unary(e, e, e);
  }
  friend Dual2 log(const Dual2& a) {
    const double iv = 1.0 / a.val;
    return a.unary(std::log(a.val), iv, -iv * iv);
  }
  friend Dual2 sqrt(const Dual2& a) {
    const double s = std::sqrt(a.val);
    return a.unary(s, 0.5 / s, -0.25 / (s * a.val));
  }
  /// Power with passive exponent. p == 1 and p == 2 are kept exact.
  friend Dual2 pow(const Dual2& a, double p) {
    if (p == 1.0) return a;
    if (p == 2.0) return a * a;
    const double f0 = std::pow(a.val, p);
    const double f1 = p * std::pow(a.val, p - 1.0);
    const double f2 = p * (p - 1.0) * std::pow(a.val, p - 2.0);
    return a.unary(f0, f1, f2);
  }
  /// Power with active exponent, via exp(p * log(a)); requires a > 0.
  /// Falls back to the passive-exponent rule when p carries no derivatives,
  /// which keeps fixed-parameter evaluations exact and cheap.
  friend Dual2 pow(const Dual2& a, const Dual2& p) {
    bool passive = true;
    for (int i = 0; i < N && passive; ++i) passive = (p.grad[i] == 0.0);
    for (int i = 0; i < kHess && passive; ++i) passive = (p.hess[i] == 0.0);
    if (passive) return pow(a, p.val);
    return exp(p * log(a));
  }
};

/// Uniform accessors so kernels can be written once for double and Dual2.
inline double value_of(double x) { return x; }
template <int N>
double value_of(const Dual2<N>& x) { return x.val; }

}  // namespace plumeinv
