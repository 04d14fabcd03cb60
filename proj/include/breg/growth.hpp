#pragma once

#include <functional>

namespace breg {

enum class GrowthKind { Quadratic, Hoelder, IntegralOfModulus };

/// Growth function omega bounding the model error |f(x) - m(x)| in terms of
/// t = |x - anchor|. Every kind is omega(t) = integral_0^t psi(r) dr for a
/// modulus psi with psi(0) = 0:
///
///   Quadratic          psi(r) = L r            omega(t) = L t^2 / 2
///   Hoelder            psi(r) = c r^alpha      omega(t) = c t^(1+alpha) / (1+alpha)
///   IntegralOfModulus  user psi                omega(t) = t * int_0^1 psi(s t) ds
///
/// The last form is evaluated by adaptive Simpson quadrature (abs. tol 1e-10).
class GrowthFunction {
 public:
  static GrowthFunction quadratic(double L);
  static GrowthFunction hoelder(double c, double alpha);
  static GrowthFunction integral_of_modulus(std::function<double(double)> psi);

  GrowthKind kind() const { return kind_; }
  double constant() const { return constant_; }
  double exponent() const { return alpha_; }

  /// omega(t). Throws UsageError for t < 0.
  double operator()(double t) const;
  /// Right derivative omega'_+(t) = psi(t).
  double right_derivative(double t) const;

 private:
  GrowthFunction() = default;

  GrowthKind kind_ = GrowthKind::Quadratic;
  double constant_ = 0.0;
  double alpha_ = 1.0;
  std::function<double(double)> psi_;
};

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

}  // namespace breg
