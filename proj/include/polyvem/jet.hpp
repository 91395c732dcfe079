#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace polyvem::ad {

/// Truncated bivariate Taylor series sum_{i+j<=Order} a_ij dx^i dy^j around a
/// base point. Arithmetic on jets propagates all partial derivatives up to
/// total order Order exactly (up to rounding).
template <int Order = 4>
class Jet {
 public:
  static constexpr int kOrder = Order;
  static constexpr int kSize = (Order + 1) * (Order + 2) / 2;

  static constexpr int index(int i, int j) {
    const int d = i + j;
    return d * (d + 1) / 2 + j;
  }

  constexpr Jet() { a_.fill(0.0); }
  constexpr Jet(double c) {  // NOLINT(google-explicit-constructor)
    a_.fill(0.0);
    a_[0] = c;
  }

  static Jet variable_x(double x0) {
    Jet j(x0);
    j.a_[index(1, 0)] = 1.0;
    return j;
  }
  static Jet variable_y(double y0) {
    Jet j(y0);
    j.a_[index(0, 1)] = 1.0;
    return j;
  }

  double value() const { return a_[0]; }
  double coefficient(int i, int j) const { return a_[index(i, j)]; }
  double& coefficient(int i, int j) { return a_[index(i, j)]; }

  /// d^{i+j} / dx^i dy^j at the base point.
  double derivative(int i, int j) const { return a_[index(i, j)] * factorial(i) * factorial(j); }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) a_[k] += o.a_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : a_) v *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (const auto& t : kProducts) r.a_[t[2]] += a.a_[t[0]] * b.a_[t[1]];
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  /// f(a) from the derivatives f^(k)(a_0), k = 0..Order.
  friend Jet compose(const Jet& a, const std::array<double, Order + 1>& derivs) {
    Jet delta = a;
    delta.a_[0] = 0.0;
    Jet r(derivs[Order] / factorial(Order));
    for (int k = Order - 1; k >= 0; --k) r = r * delta + Jet(derivs[static_cast<std::size_t>(k)] / factorial(k));
    return r;
  }

  friend Jet reciprocal(const Jet& b) {
    std::array<double, Order + 1> d{};
    const double b0 = b.value();
    double v = 1.0 / b0;
    for (int k = 0; k <= Order; ++k) {
      d[static_cast<std::size_t>(k)] = v;
      v *= -(k + 1) / b0;
    }
    return compose(b, d);
  }

 private:
  static constexpr int kNumProducts = (Order + 1) * (Order + 2) * (Order + 3) * (Order + 4) / 24;

  // (index in a, index in b, index in a*b) for every pair of total degree <= Order
  static constexpr std::array<std::array<int, 3>, kNumProducts> kProducts = [] {
    std::array<std::array<int, 3>, kNumProducts> t{};
    int n = 0;
    for (int d1 = 0; d1 <= Order; ++d1) {
      for (int j1 = 0; j1 <= d1; ++j1) {
        for (int d2 = 0; d1 + d2 <= Order; ++d2) {
          for (int j2 = 0; j2 <= d2; ++j2) t[n++] = {index(d1 - j1, j1), index(d2 - j2, j2), index(d1 - j1 + d2 - j2, j1 + j2)};
        }
      }
    }
    return t;
  }();

  static constexpr double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  }

  std::array<double, kSize> a_{};
};

template <int N>
Jet<N> sin(const Jet<N>& a) {
  std::array<double, N + 1> d{};
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const std::array<double, 4> cyc{s, c, -s, -c};
  for (int k = 0; k <= N; ++k) d[static_cast<std::size_t>(k)] = cyc[static_cast<std::size_t>(k % 4)];
  return compose(a, d);
}

template <int N>
Jet<N> cos(const Jet<N>& a) {
  std::array<double, N + 1> d{};
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const std::array<double, 4> cyc{c, -s, -c, s};
  for (int k = 0; k <= N; ++k) d[static_cast<std::size_t>(k)] = cyc[static_cast<std::size_t>(k % 4)];
  return compose(a, d);
}

template <int N>
Jet<N> pow(const Jet<N>& a, double p) {
  std::array<double, N + 1> d{};
  const double a0 = a.value();
  double v = std::pow(a0, p);
  for (int k = 0; k <= N; ++k) {
    d[static_cast<std::size_t>(k)] = v;
    v *= (p - k) / a0;
  }
  return compose(a, d);
}

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  return pow(a, 0.5);
}

/// atan(t) for a jet with t(base) = 0.
template <int N>
Jet<N> atan_near_zero(const Jet<N>& t) {
  // derivatives of atan at 0: 0, 1, 0, -2, 0, 24, 0, -720, ...
  std::array<double, N + 1> d{};
  double f = 1.0;
  for (int k = 1; k <= N; k += 2) {
    d[static_cast<std::size_t>(k)] = ((k / 2) % 2 == 0 ? 1.0 : -1.0) * f;
    f *= k * (k + 1);
  }
  Jet<N> shifted = t;
  shifted.coefficient(0, 0) = 0.0;
  return compose(shifted, d) + Jet<N>(std::atan(t.value()));
}

/// Polar angle in [cut, cut + 2 pi).
inline double polar_angle(double x, double y, double cut = 0.0) {
  double t = std::atan2(y, x);
  while (t < cut) t += 2.0 * std::numbers::pi;
  while (t >= cut + 2.0 * std::numbers::pi) t -= 2.0 * std::numbers::pi;
  return t;
}

inline double polar_radius(double x, double y) { return std::hypot(x, y); }

template <int N>
Jet<N> polar_radius(const Jet<N>& x, const Jet<N>& y) {
  return sqrt(x * x + y * y);
}

/// theta = theta_0 + atan(cross / dot) with cross, dot taken against the base point.
template <int N>
Jet<N> polar_angle(const Jet<N>& x, const Jet<N>& y, double cut = 0.0) {
  const double x0 = x.value();
  const double y0 = y.value();
  const double theta0 = polar_angle(x0, y0, cut);
  const Jet<N> cr = x0 * y - y0 * x;
  const Jet<N> dt = x0 * x + y0 * y;
  return atan_near_zero(cr / dt) + Jet<N>(theta0);
}

}  // namespace polyvem::ad
