#include "breg/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "breg/errors.hpp"

namespace breg {

namespace {

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) {
    throw UsageError(std::string("non-finite entry in ") + what);
  }
}

void require_positive_scale(double tau) {
  if (!(tau > 0) || !std::isfinite(tau)) {
    throw UsageError("geometry scale must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Euclidean: return "euclidean";
    case GeometryKind::VariableMetric: return "variable-metric";
    case GeometryKind::BoltzmannShannon: return "boltzmann-shannon";
    case GeometryKind::Burg: return "burg";
  }
  return "unknown";
}

Geometry Geometry::euclidean(double scale) {
  require_positive_scale(scale);
  return Geometry(GeometryKind::Euclidean, scale);
}

Geometry Geometry::variable_metric(const Matrix& metric, double scale) {
  require_positive_scale(scale);
  if (metric.rows() != metric.cols() || metric.rows() == 0) {
    throw UsageError("metric must be a non-empty square matrix");
  }
  if (!metric.allFinite()) throw UsageError("non-finite entry in metric");
  if ((metric - metric.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw UsageError("metric must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(metric);
  if (eig.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of metric failed");
  }
  const Vector lambda = eig.eigenvalues().cwiseMax(kMinMetricEigenvalue).cwiseMin(kMaxMetricEigenvalue);
  Geometry g(GeometryKind::VariableMetric, scale);
  g.metric_ = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  g.metric_ = 0.5 * (g.metric_ + g.metric_.transpose());
  return g;
}

Geometry Geometry::boltzmann_shannon(double scale) {
  require_positive_scale(scale);
  return Geometry(GeometryKind::BoltzmannShannon, scale);
}

Geometry Geometry::burg(double scale) {
  require_positive_scale(scale);
  return Geometry(GeometryKind::Burg, scale);
}

DomainKind Geometry::domain() const {
  switch (kind_) {
    case GeometryKind::Euclidean:
    case GeometryKind::VariableMetric: return DomainKind::FullSpace;
    case GeometryKind::BoltzmannShannon:
    case GeometryKind::Burg: return DomainKind::PositiveOrthant;
  }
  return DomainKind::FullSpace;
}

Geometry Geometry::scaled(double tau) const {
  require_positive_scale(tau);
  Geometry g = *this;
  g.scale_ = scale_ * tau;
  return g;
}

Geometry Geometry::with_interior_floor(double floor) const {
  if (!(floor >= 0) || !std::isfinite(floor)) {
    throw UsageError("interior floor must be nonnegative and finite");
  }
  Geometry g = *this;
  g.floor_ = floor;
  return g;
}

void Geometry::check_dimension(Eigen::Index n) const {
  if (kind_ == GeometryKind::VariableMetric && metric_.rows() != n) {
    throw UsageError("dimension mismatch between point and metric");
  }
}

bool Geometry::in_domain(const Vector& x) const {
  if (!x.allFinite()) return false;
  switch (kind_) {
    case GeometryKind::Euclidean: return true;
    case GeometryKind::VariableMetric: return x.size() == metric_.rows();
    case GeometryKind::BoltzmannShannon: return (x.array() >= 0.0).all();
    case GeometryKind::Burg: return (x.array() > 0.0).all();
  }
  return false;
}

bool Geometry::in_interior(const Vector& x) const {
  if (!x.allFinite()) return false;
  switch (kind_) {
    case GeometryKind::Euclidean: return true;
    case GeometryKind::VariableMetric: return x.size() == metric_.rows();
    case GeometryKind::BoltzmannShannon:
    case GeometryKind::Burg: return (x.array() > floor_).all();
  }
  return false;
}

double Geometry::value(const Vector& x) const {
  require_finite(x, "point");
  check_dimension(x.size());
  if (!in_domain(x)) return kInfinity;
  switch (kind_) {
    case GeometryKind::Euclidean: return 0.5 * x.squaredNorm() / scale_;
    case GeometryKind::VariableMetric: return 0.5 * x.dot(metric_ * x) / scale_;
    case GeometryKind::BoltzmannShannon: {
      double s = 0.0;
      for (double xi : x) {
        if (xi > 0) s += xi * std::log(xi);
      }
      return s / scale_;
    }
    case GeometryKind::Burg: return -x.array().log().sum() / scale_;
  }
  return kInfinity;
}

Vector Geometry::gradient(const Vector& x) const {
  require_finite(x, "point");
  check_dimension(x.size());
  if (!in_interior(x)) throw DomainError("gradient of h requested outside int dom h");
  switch (kind_) {
    case GeometryKind::Euclidean: return x / scale_;
    case GeometryKind::VariableMetric: return metric_ * x / scale_;
    case GeometryKind::BoltzmannShannon: return (x.array().log() + 1.0).matrix() / scale_;
    case GeometryKind::Burg: return (-x.array().inverse()).matrix() / scale_;
  }
  return {};
}

double Geometry::distance(const Vector& x, const Vector& anchor) const {
  if (x.size() != anchor.size()) throw UsageError("dimension mismatch in Bregman distance");
  require_finite(x, "point");
  require_finite(anchor, "anchor");
  check_dimension(x.size());
  if (!in_interior(anchor) || !in_domain(x)) return kInfinity;

  double d = 0.0;
  switch (kind_) {
    case GeometryKind::Euclidean:
      d = 0.5 * (x - anchor).squaredNorm();
      break;
    case GeometryKind::VariableMetric: {
      const Vector diff = x - anchor;
      d = 0.5 * diff.dot(metric_ * diff);
      break;
    }
    case GeometryKind::BoltzmannShannon:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double ai = anchor[i];
        d += (xi > 0 ? xi * std::log(xi / ai) : 0.0) - xi + ai;
      }
      break;
    case GeometryKind::Burg:
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double r = x[i] / anchor[i];
        d += r - std::log(r) - 1.0;
      }
      break;
  }
  // Rounding can leave a tiny negative value when x and anchor nearly agree.
  return std::max(d, 0.0) / scale_;
}

}  // namespace breg
