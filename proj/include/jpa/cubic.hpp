#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace jpa {

template <class Scalar>
struct CubicRoots {
  std::array<Scalar, 3> root{};  // ascending; only the first `count` are valid
  int count = 0;
};

namespace detail {

template <class Scalar>
inline Scalar cubic_eval(Scalar a, Scalar b, Scalar c, Scalar x) {
  return ((x + a) * x + b) * x + c;
}

// Guarded Newton step on x^3 + a x^2 + b x + c; keeps x if the step
// does not reduce |f|.
template <class Scalar>
inline Scalar cubic_polish(Scalar a, Scalar b, Scalar c, Scalar x) {
  for (int it = 0; it < 2; ++it) {
    const Scalar f = cubic_eval(a, b, c, x);
    if (f == Scalar(0)) return x;
    const Scalar df = (Scalar(3) * x + Scalar(2) * a) * x + b;
    if (df == Scalar(0)) return x;
    const Scalar y = x - f / df;
    if (!(std::abs(cubic_eval(a, b, c, y)) < std::abs(f))) return x;
    x = y;
  }
  return x;
}

}  // namespace detail

// Real roots of x^3 + a x^2 + b x + c = 0. Trigonometric branch for three
// real roots, Cardano otherwise, each root polished by Newton steps.
template <class Scalar>
CubicRoots<Scalar> solve_cubic(Scalar a, Scalar b, Scalar c) {
  CubicRoots<Scalar> out;
  const Scalar third = Scalar(1) / Scalar(3);
  const Scalar shift = a * third;

  // Depressed form t^3 + p t + q with x = t - a/3.
  const Scalar p = b - a * shift;
  const Scalar q = c + shift * (Scalar(2) * shift * shift - b);

  const Scalar half_q = q / Scalar(2);
  const Scalar disc = half_q * half_q + p * p * p / Scalar(27);

  if (disc < Scalar(0)) {
    // Three distinct real roots (requires p < 0 here).
    const Scalar m = Scalar(2) * std::sqrt(-p * third);
    const Scalar arg = std::clamp(Scalar(3) * q / (p * m), Scalar(-1), Scalar(1));
    const Scalar phi = std::acos(arg) * third;
    const Scalar two_pi_third = Scalar(2) * Scalar(3.14159265358979323846) * third;
    out.root[0] = m * std::cos(phi) - shift;
    out.root[1] = m * std::cos(phi - two_pi_third) - shift;
    out.root[2] = m * std::cos(phi + two_pi_third) - shift;
    out.count = 3;
  } else if (disc == Scalar(0)) {
    if (p == Scalar(0)) {
      // Triple root.
      out.root[0] = out.root[1] = out.root[2] = -shift;
      out.count = 3;
    } else {
      // Double root plus a simple one.
      const Scalar dbl = -Scalar(3) * q / (Scalar(2) * p);
      const Scalar simple = Scalar(3) * q / p;
      out.root[0] = simple - shift;
      out.root[1] = dbl - shift;
      out.root[2] = dbl - shift;
      out.count = 3;
    }
  } else {
    // One real root; pick the cube root avoiding cancellation.
    const Scalar s = std::sqrt(disc);
    const Scalar u = std::cbrt(q < Scalar(0) ? -half_q + s : -half_q - s);
    const Scalar v = (u == Scalar(0)) ? Scalar(0) : -p / (Scalar(3) * u);
    out.root[0] = u + v - shift;
    out.count = 1;
  }

  for (int i = 0; i < out.count; ++i)
    out.root[i] = detail::cubic_polish(a, b, c, out.root[i]);
  std::sort(out.root.begin(), out.root.begin() + out.count);
  return out;
}

}  // namespace jpa
