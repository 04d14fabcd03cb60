#pragma once

#include <string_view>

#include "breg/types.hpp"

namespace breg {

enum class GeometryKind { Euclidean, VariableMetric, BoltzmannShannon, Burg };

enum class DomainKind { FullSpace, PositiveOrthant };

std::string_view to_string(GeometryKind kind);

/// Legendre generator h together with a positive scale tau.
///
/// All quantities are reported for h/tau, so `distance` returns
/// D_h(x, anchor) / tau and `gradient` returns grad h(x) / tau. Generators:
///
///   Euclidean          h(x) = 1/2 |x|^2
///   VariableMetric     h(x) = 1/2 <x, A x>, eigenvalues of A in [1e-6, 1e6]
///   BoltzmannShannon   h(x) = sum x_i log x_i on [0, inf)^N, with 0 log 0 = 0
///   Burg               h(x) = -sum log x_i on (0, inf)^N
///
/// Instances are immutable; every member is a pure function of its inputs.
class Geometry {
 public:
  static constexpr double kMinMetricEigenvalue = 1e-6;
  static constexpr double kMaxMetricEigenvalue = 1e6;

  static Geometry euclidean(double scale = 1.0);
  /// `metric` must be symmetric; its eigenvalues are clamped into
  /// [kMinMetricEigenvalue, kMaxMetricEigenvalue].
  static Geometry variable_metric(const Matrix& metric, double scale = 1.0);
  static Geometry boltzmann_shannon(double scale = 1.0);
  static Geometry burg(double scale = 1.0);

  GeometryKind kind() const { return kind_; }
  DomainKind domain() const;
  double scale() const { return scale_; }
  /// Empty unless kind() == VariableMetric.
  const Matrix& metric() const { return metric_; }
  double interior_floor() const { return floor_; }

  /// Same geometry with scale multiplied by tau, i.e. distances divided by tau.
  Geometry scaled(double tau) const;
  /// Interior test becomes x_i > floor for the entropies. Default floor is 0.
  Geometry with_interior_floor(double floor) const;

  /// h(x)/scale; +inf outside dom h.
  double value(const Vector& x) const;
  /// grad h(x)/scale. Throws DomainError unless x is interior.
  Vector gradient(const Vector& x) const;
  /// D_h(x, anchor)/scale. +inf when anchor is not interior or x is outside
  /// dom h. Throws UsageError on dimension mismatch or non-finite input.
  double distance(const Vector& x, const Vector& anchor) const;

  bool in_domain(const Vector& x) const;
  bool in_interior(const Vector& x) const;

 private:
  Geometry(GeometryKind kind, double scale) : kind_(kind), scale_(scale) {}

  void check_dimension(Eigen::Index n) const;

  GeometryKind kind_;
  double scale_;
  double floor_ = 0.0;
  Matrix metric_;
};

}  // namespace breg
