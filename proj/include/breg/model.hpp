#pragma once

#include <functional>
#include <optional>
#include <string_view>

#include "breg/geometry.hpp"
#include "breg/growth.hpp"
#include "breg/types.hpp"

namespace breg {

enum class ModelKind { ForwardBackward, VariableMetricFB, ProxLinear, Reweighted };

std::string_view to_string(ModelKind kind);

/// Closed convex term f0 with a structure the subproblem solvers recognise.
class ConvexTerm {
 public:
  enum class Kind { Zero, WeightedL1, Nonnegative, Simplex };

  static ConvexTerm zero();
  /// lambda * |x|_1.
  static ConvexTerm l1(double weight);
  /// sum_i w_i |x_i| with w >= 0.
  static ConvexTerm weighted_l1(Vector weights);
  /// Indicator of x >= 0.
  static ConvexTerm nonnegative();
  /// Indicator of the unit simplex {x >= 0, sum x = 1}.
  static ConvexTerm simplex();

  Kind kind() const { return kind_; }
  /// Per-coordinate l1 weights expanded to length n (WeightedL1 only).
  Vector weights(Eigen::Index n) const;

  /// f0(x); +inf outside dom f0.
  double value(const Vector& x) const;
  bool contains(const Vector& x) const;
  /// Euclidean prox: argmin_x t f0(x) + 1/2 |x - v|^2.
  Vector prox(const Vector& v, double t) const;

 private:
  explicit ConvexTerm(Kind kind) : kind_(kind) {}

  Kind kind_;
  Vector weights_;
};

/// Continuously differentiable scalar function. `hessian` is optional.
struct SmoothFunction {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

/// Vector-valued map F with its Jacobian (rows are gradients of F_i).
struct SmoothMap {
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
};

/// Convex, finite-valued outer function g of a composite g(F(x)).
class OuterFunction {
 public:
  enum class Kind { L1, HalfSquared, Huber, Smooth };

  /// g(z) = |z|_1.
  static OuterFunction l1();
  /// g(z) = 1/2 |z|^2.
  static OuterFunction half_squared();
  /// Huber with threshold mu: z^2/(2 mu) if |z| <= mu else |z| - mu/2, summed.
  static OuterFunction huber(double mu);
  /// Any convex C^1 function.
  static OuterFunction smooth(SmoothFunction g);

  Kind kind() const { return kind_; }
  bool is_smooth() const { return kind_ != Kind::L1; }
  double value(const Vector& z) const;
  /// Throws UsageError for the non-smooth L1 kind.
  Vector gradient(const Vector& z) const;

 private:
  explicit OuterFunction(Kind kind) : kind_(kind) {}

  Kind kind_;
  double mu_ = 1.0;
  SmoothFunction g_;
};

/// Inner components F_i of a reweighted model. Each F_i must be convex.
class ConvexComponents {
 public:
  /// F_i(x) = |x_i|.
  static ConvexComponents absolute_value();
  /// Smooth convex components with Jacobian.
  static ConvexComponents smooth(SmoothMap map);

  bool is_absolute_value() const { return absolute_; }
  Vector value(const Vector& x) const;
  Matrix jacobian(const Vector& x) const;

 private:
  bool absolute_ = false;
  SmoothMap map_;
};

/// Model m_anchor(x) bound to one anchor, written in the canonical form
///
///   c + <l, d> + 1/2 <d, B d> + f0(x) + g(r + J d) + <w, F(x)>,   d = x - anchor,
///
/// where each of the last four pieces may be absent. Immutable.
class AnchoredModel {
 public:
  ModelKind kind() const { return kind_; }
  const Vector& anchor() const { return anchor_; }
  /// f(anchor) = m_anchor(anchor).
  double anchor_value() const { return anchor_value_; }

  double value(const Vector& x) const;

  /// The prox-friendly convex term f0 (after any reweighting absorbed into it).
  const ConvexTerm& prox_term() const { return f0_; }
  /// True when everything except f0 is affine: c + <l, x - anchor>.
  bool is_linear() const;
  /// True when everything except f0 is differentiable.
  bool has_smooth_remainder() const;
  /// Linear coefficient l.
  const Vector& linear_term() const { return linear_; }
  /// Quadratic coefficient B, empty when absent.
  const Matrix& quadratic_term() const { return quadratic_; }
  /// True when the remainder is exactly |r + J (x - anchor)|_1.
  bool is_l1_composite() const;
  const Vector& composite_offset() const { return offset_; }
  const Matrix& composite_jacobian() const { return jacobian_; }

  /// Everything except f0. Requires has_smooth_remainder() for the gradient.
  double remainder_value(const Vector& x) const;
  Vector remainder_gradient(const Vector& x) const;

 private:
  friend class Model;
  AnchoredModel() : f0_(ConvexTerm::zero()), outer_(OuterFunction::l1()) {}

  ModelKind kind_ = ModelKind::ForwardBackward;
  Vector anchor_;
  double anchor_value_ = 0.0;
  double constant_ = 0.0;
  Vector linear_;
  Matrix quadratic_;
  ConvexTerm f0_;
  bool has_composite_ = false;
  OuterFunction outer_;
  Vector offset_;
  Matrix jacobian_;
  bool has_reweighted_ = false;
  Vector weights_;
  SmoothMap components_;
};

/// Objective f together with the recipe that builds its convex models.
///
///   ForwardBackward   f = f0 + f1,      m = f0 + f1(a) + <grad f1(a), x - a>
///   VariableMetricFB  f = f0 + f1,      adds 1/2 <x - a, [hess f1(a)]_+ (x - a)>
///   ProxLinear        f = f0 + g o F,   m = f0 + g(F(a) + DF(a)(x - a))
///   Reweighted        f = f0 + g o F,   m = f0 + g(F(a)) + <F(x) - F(a), grad g(F(a))>
///
/// The growth function is declared by the caller, never inferred.
class Model {
 public:
  static Model forward_backward(ConvexTerm f0, SmoothFunction f1, GrowthFunction growth);
  /// `f1.hessian` is required.
  static Model variable_metric(ConvexTerm f0, SmoothFunction f1, GrowthFunction growth);
  static Model prox_linear(ConvexTerm f0, OuterFunction g, SmoothMap F, GrowthFunction growth);
  /// grad g must be nonnegative on the range of F; checked at every anchor.
  static Model reweighted(ConvexTerm f0, SmoothFunction g, ConvexComponents F,
                          GrowthFunction growth);

  ModelKind kind() const { return kind_; }
  const GrowthFunction& growth() const { return growth_; }
  const ConvexTerm& f0() const { return f0_; }

  /// f(x); +inf outside dom f. Throws UsageError on non-finite input.
  double objective(const Vector& x) const;
  /// Builds m_anchor. Throws UsageError when f(anchor) is not finite.
  AnchoredModel anchor(const Vector& anchor) const;

 private:
  Model(ModelKind kind, ConvexTerm f0, GrowthFunction growth)
      : kind_(kind), f0_(std::move(f0)), growth_(std::move(growth)),
        outer_(OuterFunction::l1()) {}

  double smooth_objective(const Vector& x) const;

  ModelKind kind_;
  ConvexTerm f0_;
  GrowthFunction growth_;
  SmoothFunction f1_;
  OuterFunction outer_;
  SmoothMap inner_;
  SmoothFunction reweight_outer_;
  std::optional<ConvexComponents> components_;
};

/// Minimisation problem: model recipe, base geometry and a feasible start.
struct Problem {
  /// Throws UsageError unless x0 lies in dom f and int dom h.
  Problem(Model model, Geometry geometry, Vector x0, std::optional<double> lower_bound = {});

  Model model;
  Geometry geometry;
  Vector x0;
  std::optional<double> lower_bound;
};

/// m_anchor(x).
double model_value(const Model& model, const Vector& anchor, const Vector& x);

/// omega(t) of the model's declared growth function.
double growth_bound(const Model& model, double t);

/// Symmetric H with eigenvalues raised to at least `floor`.
/// Throws UsageError when H deviates from symmetry by more than 1e-9.
Matrix hessian_psd_part(const Matrix& H, double floor = 1e-6);

}  // namespace breg
