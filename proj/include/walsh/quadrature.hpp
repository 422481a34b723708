#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "walsh/error.hpp"

namespace walsh::quad {

/// Adaptive Simpson with absolute tolerance per accepted subinterval.
/// Throws NumericError when the recursion bottoms out unconverged or the
/// integrand is non-finite.
class AdaptiveSimpson {
 public:
  explicit AdaptiveSimpson(double abs_tol = 1e-10, int max_depth = 40)
      : abs_tol_(abs_tol), max_depth_(max_depth) {}

  template <class F>
  double integrate(F&& f, double a, double b) const {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    check_finite(fa, a);
    check_finite(fb, b);
    check_finite(fm, m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return refine(f, a, b, fa, fm, fb, whole, abs_tol_, 0);
  }

 private:
  static void check_finite(double v, double x) {
    if (!std::isfinite(v))
      throw NumericError("quadrature integrand is not finite at r = " + std::to_string(x));
  }

  template <class F>
  double refine(F& f, double a, double b, double fa, double fm, double fb, double whole,
                double tol, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    check_finite(flm, lm);
    check_finite(frm, rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Interval-length floor: the tolerance is per subinterval, and halving it
    // at each level would demand sub-ulp accuracy at depth.
    // Rounding floor: large integrands cannot resolve below a few ulps.
    const double floor = std::max(abs_tol_ * 1e-6, 64.0 * kEps * (std::abs(left) + std::abs(right)));
    if (std::abs(delta) <= 15.0 * std::max(tol, floor)) return left + right + delta / 15.0;
    if (depth >= max_depth_) {
      throw NumericError("adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "], residual " + std::to_string(delta));
    }
    return refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }

  static constexpr double kEps = 2.220446049250313e-16;
  double abs_tol_;
  int max_depth_;
};

}  // namespace walsh::quad
