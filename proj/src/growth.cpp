#include "breg/growth.hpp"

#include <cmath>
#include <utility>

#include "breg/errors.hpp"

namespace breg {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

GrowthFunction GrowthFunction::quadratic(double L) {
  if (!(L >= 0) || !std::isfinite(L)) throw UsageError("growth constant L must be nonnegative");
  GrowthFunction g;
  g.kind_ = GrowthKind::Quadratic;
  g.constant_ = L;
  return g;
}

GrowthFunction GrowthFunction::hoelder(double c, double alpha) {
  if (!(c >= 0) || !std::isfinite(c)) throw UsageError("Hoelder constant must be nonnegative");
  if (!(alpha > 0 && alpha <= 1)) throw UsageError("Hoelder exponent must lie in (0, 1]");
  GrowthFunction g;
  g.kind_ = GrowthKind::Hoelder;
  g.constant_ = c;
  g.alpha_ = alpha;
  return g;
}

GrowthFunction GrowthFunction::integral_of_modulus(std::function<double(double)> psi) {
  if (!psi) throw UsageError("modulus function is empty");
  GrowthFunction g;
  g.kind_ = GrowthKind::IntegralOfModulus;
  g.psi_ = std::move(psi);
  return g;
}

double GrowthFunction::operator()(double t) const {
  if (!(t >= 0)) throw UsageError("growth function evaluated at negative t");
  if (t == 0) return 0.0;
  switch (kind_) {
    case GrowthKind::Quadratic: return 0.5 * constant_ * t * t;
    case GrowthKind::Hoelder: return constant_ * std::pow(t, 1.0 + alpha_) / (1.0 + alpha_);
    case GrowthKind::IntegralOfModulus: {
      const auto integrand = [this, t](double s) { return psi_(s * t); };
      return t * adaptive_simpson(integrand, 0.0, 1.0, 1e-10 / t);
    }
  }
  return 0.0;
}

double GrowthFunction::right_derivative(double t) const {
  if (!(t >= 0)) throw UsageError("growth function evaluated at negative t");
  switch (kind_) {
    case GrowthKind::Quadratic: return constant_ * t;
    case GrowthKind::Hoelder: return constant_ * std::pow(t, alpha_);
    case GrowthKind::IntegralOfModulus: return psi_(t);
  }
  return 0.0;
}

}  // namespace breg
