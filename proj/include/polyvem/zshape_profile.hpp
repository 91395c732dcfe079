#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace polyvem {

/// Angular part g(theta) of the corner singularity r^{1+z} g(theta) of the
/// clamped plate at a corner with interior angle omega, together with its
/// first four derivatives.
struct AngularProfile {
  double exponent = 0.0;  // z
  double omega = 0.0;     // interior angle
  std::array<double, 5> (*derivatives)(double theta, double z, double omega) = nullptr;

  std::array<double, 5> operator()(double theta) const { return derivatives(theta, exponent, omega); }
  explicit operator bool() const { return derivatives != nullptr; }
};

inline constexpr double kZShapeExponent = 0.505009698896589;
inline constexpr double kZShapeAngle = 7.0 * std::numbers::pi / 4.0;

namespace detail {

// d^k/dt^k of cos(a t) and sin(a t), k = 0..4
inline void trig_derivatives(double a, double t, std::array<double, 5>& dc, std::array<double, 5>& ds) {
  const double c = std::cos(a * t);
  const double s = std::sin(a * t);
  const std::array<double, 4> cyc_c{c, -s, -c, s};
  const std::array<double, 4> cyc_s{s, c, -s, -c};
  double ak = 1.0;
  for (std::size_t k = 0; k < 5; ++k) {
    dc[k] = ak * cyc_c[k % 4];
    ds[k] = ak * cyc_s[k % 4];
    ak *= a;
  }
}

// Grisvard, Singularities in boundary value problems (1992), p. 107:
//   g(t) = [sin((z-1)w)/(z-1) - sin((z+1)w)/(z+1)] [cos((z-1)t) - cos((z+1)t)]
//        - [sin((z-1)t)/(z-1) - sin((z+1)t)/(z+1)] [cos((z-1)w) - cos((z+1)w)]
inline std::array<double, 5> grisvard_derivatives(double t, double z, double w) {
  const double am = z - 1.0;
  const double ap = z + 1.0;
  const double A = std::sin(am * w) / am - std::sin(ap * w) / ap;
  const double C = std::cos(am * w) - std::cos(ap * w);
  std::array<double, 5> cm{}, sm{}, cp{}, sp{};
  trig_derivatives(am, t, cm, sm);
  trig_derivatives(ap, t, cp, sp);
  std::array<double, 5> d{};
  for (std::size_t k = 0; k < 5; ++k) d[k] = A * (cm[k] - cp[k]) - C * (sm[k] / am - sp[k] / ap);
  return d;
}

}  // namespace detail

inline AngularProfile grisvard_profile(double z = kZShapeExponent, double omega = kZShapeAngle) {
  return AngularProfile{z, omega, &detail::grisvard_derivatives};
}

/// Checks the clamped corner conditions g(0) = g'(0) = g(omega) = g'(omega) = 0
/// and the characteristic equation sin^2(z omega) = z^2 sin^2(omega).
/// Returns a failure reason, or nothing when the profile is consistent.
inline std::optional<std::string> check_profile(const AngularProfile& g, double tol = 1e-12) {
  if (!g) return std::string("no angular profile supplied");
  const double z = g.exponent;
  const double w = g.omega;
  const double residual = std::sin(z * w) * std::sin(z * w) - z * z * std::sin(w) * std::sin(w);
  if (!(std::abs(residual) <= tol)) {
    return "characteristic residual " + std::to_string(residual) + " exceeds tolerance";
  }
  const auto at0 = g(0.0);
  const auto atw = g(w);
  double scale = 0.0;
  for (double t = 0.0; t <= w; t += w / 64.0) scale = std::max(scale, std::abs(g(t)[0]));
  if (!(scale > 0.0)) return std::string("profile vanishes identically");
  const double worst = std::max({std::abs(at0[0]), std::abs(at0[1]), std::abs(atw[0]), std::abs(atw[1])});
  if (!(worst <= tol * std::max(1.0, scale))) {
    return "corner boundary conditions violated by " + std::to_string(worst);
  }
  return std::nullopt;
}

}  // namespace polyvem
