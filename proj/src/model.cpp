#include "breg/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include <Eigen/Eigenvalues>

#include "breg/errors.hpp"

namespace breg {

namespace {

double finite_or_inf(double v) { return std::isnan(v) ? kInfinity : v; }

Vector project_simplex(const Vector& v) {
  // Sort-based projection onto {x >= 0, sum x = 1}.
  Vector u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ForwardBackward: return "forward-backward";
    case ModelKind::VariableMetricFB: return "variable-metric-fb";
    case ModelKind::ProxLinear: return "prox-linear";
    case ModelKind::Reweighted: return "reweighted";
  }
  return "unknown";
}

// ---------------------------------------------------------------- ConvexTerm

ConvexTerm ConvexTerm::zero() { return ConvexTerm(Kind::Zero); }

ConvexTerm ConvexTerm::l1(double weight) {
  if (!(weight >= 0) || !std::isfinite(weight)) throw UsageError("l1 weight must be nonnegative");
  ConvexTerm t(Kind::WeightedL1);
  t.weights_ = Vector::Constant(1, weight);
  return t;
}

ConvexTerm ConvexTerm::weighted_l1(Vector weights) {
  if (!weights.allFinite() || (weights.array() < 0).any()) {
    throw UsageError("l1 weights must be nonnegative and finite");
  }
  ConvexTerm t(Kind::WeightedL1);
  t.weights_ = std::move(weights);
  return t;
}

ConvexTerm ConvexTerm::nonnegative() { return ConvexTerm(Kind::Nonnegative); }

ConvexTerm ConvexTerm::simplex() { return ConvexTerm(Kind::Simplex); }

Vector ConvexTerm::weights(Eigen::Index n) const {
  if (kind_ != Kind::WeightedL1) return Vector::Zero(n);
  if (weights_.size() == 1) return Vector::Constant(n, weights_[0]);
  if (weights_.size() != n) throw UsageError("l1 weight vector has the wrong length");
  return weights_;
}

bool ConvexTerm::contains(const Vector& x) const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::WeightedL1: return true;
    case Kind::Nonnegative: return (x.array() >= 0).all();
    case Kind::Simplex:
      return (x.array() >= 0).all() &&
             std::abs(x.sum() - 1.0) <= 1e-9 * std::max<double>(1.0, static_cast<double>(x.size()));
  }
  return false;
}

double ConvexTerm::value(const Vector& x) const {
  if (!contains(x)) return kInfinity;
  if (kind_ == Kind::WeightedL1) return weights(x.size()).dot(x.cwiseAbs());
  return 0.0;
}

Vector ConvexTerm::prox(const Vector& v, double t) const {
  switch (kind_) {
    case Kind::Zero: return v;
    case Kind::WeightedL1: {
      const Vector thresh = t * weights(v.size());
      return (v.array().sign() * (v.array().abs() - thresh.array()).cwiseMax(0.0)).matrix();
    }
    case Kind::Nonnegative: return v.cwiseMax(0.0);
    case Kind::Simplex: return project_simplex(v);
  }
  return v;
}

// ------------------------------------------------------------- OuterFunction

OuterFunction OuterFunction::l1() { return OuterFunction(Kind::L1); }

OuterFunction OuterFunction::half_squared() { return OuterFunction(Kind::HalfSquared); }

OuterFunction OuterFunction::huber(double mu) {
  if (!(mu > 0) || !std::isfinite(mu)) throw UsageError("Huber threshold must be positive");
  OuterFunction g(Kind::Huber);
  g.mu_ = mu;
  return g;
}

OuterFunction OuterFunction::smooth(SmoothFunction g) {
  if (!g.value || !g.gradient) throw UsageError("smooth outer function needs value and gradient");
  OuterFunction out(Kind::Smooth);
  out.g_ = std::move(g);
  return out;
}

double OuterFunction::value(const Vector& z) const {
  switch (kind_) {
    case Kind::L1: return z.cwiseAbs().sum();
    case Kind::HalfSquared: return 0.5 * z.squaredNorm();
    case Kind::Huber: {
      double s = 0.0;
      for (double zi : z) {
        const double a = std::abs(zi);
        s += a <= mu_ ? 0.5 * zi * zi / mu_ : a - 0.5 * mu_;
      }
      return s;
    }
    case Kind::Smooth: return finite_or_inf(g_.value(z));
  }
  return kInfinity;
}

Vector OuterFunction::gradient(const Vector& z) const {
  switch (kind_) {
    case Kind::L1: throw UsageError("the l1 outer function has no gradient");
    case Kind::HalfSquared: return z;
    case Kind::Huber: return (z / mu_).cwiseMax(-1.0).cwiseMin(1.0);
    case Kind::Smooth: return g_.gradient(z);
  }
  return {};
}

// ---------------------------------------------------------- ConvexComponents

ConvexComponents ConvexComponents::absolute_value() {
  ConvexComponents c;
  c.absolute_ = true;
  return c;
}

ConvexComponents ConvexComponents::smooth(SmoothMap map) {
  if (!map.value || !map.jacobian) throw UsageError("component map needs value and jacobian");
  ConvexComponents c;
  c.map_ = std::move(map);
  return c;
}

Vector ConvexComponents::value(const Vector& x) const {
  return absolute_ ? Vector(x.cwiseAbs()) : map_.value(x);
}

Matrix ConvexComponents::jacobian(const Vector& x) const {
  if (absolute_) return x.array().sign().matrix().asDiagonal();
  return map_.jacobian(x);
}

// ------------------------------------------------------------- AnchoredModel

bool AnchoredModel::is_linear() const {
  return quadratic_.size() == 0 && !has_composite_ && !has_reweighted_;
}

bool AnchoredModel::has_smooth_remainder() const {
  return !has_composite_ || outer_.is_smooth();
}

bool AnchoredModel::is_l1_composite() const {
  return has_composite_ && outer_.kind() == OuterFunction::Kind::L1 && quadratic_.size() == 0 &&
         !has_reweighted_ && linear_.isZero(0.0);
}

double AnchoredModel::remainder_value(const Vector& x) const {
  const Vector d = x - anchor_;
  double v = constant_ + linear_.dot(d);
  if (quadratic_.size() != 0) v += 0.5 * d.dot(quadratic_ * d);
  if (has_composite_) v += outer_.value(offset_ + jacobian_ * d);
  if (has_reweighted_) v += weights_.dot(components_.value(x));
  return finite_or_inf(v);
}

Vector AnchoredModel::remainder_gradient(const Vector& x) const {
  if (!has_smooth_remainder()) throw UsageError("model remainder is not differentiable");
  const Vector d = x - anchor_;
  Vector g = linear_;
  if (quadratic_.size() != 0) g += quadratic_ * d;
  if (has_composite_) g += jacobian_.transpose() * outer_.gradient(offset_ + jacobian_ * d);
  if (has_reweighted_) g += components_.jacobian(x).transpose() * weights_;
  return g;
}

double AnchoredModel::value(const Vector& x) const {
  if (x.size() != anchor_.size()) throw UsageError("dimension mismatch in model evaluation");
  if (!x.allFinite()) throw UsageError("non-finite point in model evaluation");
  const double base = f0_.value(x);
  if (!std::isfinite(base)) return kInfinity;
  return finite_or_inf(base + remainder_value(x));
}

// --------------------------------------------------------------------- Model

Model Model::forward_backward(ConvexTerm f0, SmoothFunction f1, GrowthFunction growth) {
  if (!f1.value || !f1.gradient) throw UsageError("f1 needs value and gradient");
  Model m(ModelKind::ForwardBackward, std::move(f0), std::move(growth));
  m.f1_ = std::move(f1);
  return m;
}

Model Model::variable_metric(ConvexTerm f0, SmoothFunction f1, GrowthFunction growth) {
  if (!f1.value || !f1.gradient || !f1.hessian) {
    throw UsageError("variable metric model needs value, gradient and hessian of f1");
  }
  Model m(ModelKind::VariableMetricFB, std::move(f0), std::move(growth));
  m.f1_ = std::move(f1);
  return m;
}

Model Model::prox_linear(ConvexTerm f0, OuterFunction g, SmoothMap F, GrowthFunction growth) {
  if (!F.value || !F.jacobian) throw UsageError("inner map needs value and jacobian");
  Model m(ModelKind::ProxLinear, std::move(f0), std::move(growth));
  m.outer_ = std::move(g);
  m.inner_ = std::move(F);
  return m;
}

Model Model::reweighted(ConvexTerm f0, SmoothFunction g, ConvexComponents F, GrowthFunction growth) {
  if (!g.value || !g.gradient) throw UsageError("outer function needs value and gradient");
  Model m(ModelKind::Reweighted, std::move(f0), std::move(growth));
  m.reweight_outer_ = std::move(g);
  m.components_ = std::move(F);
  return m;
}

double Model::smooth_objective(const Vector& x) const {
  switch (kind_) {
    case ModelKind::ForwardBackward:
    case ModelKind::VariableMetricFB: return f1_.value(x);
    case ModelKind::ProxLinear: return outer_.value(inner_.value(x));
    case ModelKind::Reweighted: return reweight_outer_.value(components_->value(x));
  }
  return kInfinity;
}

double Model::objective(const Vector& x) const {
  if (!x.allFinite()) throw UsageError("non-finite point in objective evaluation");
  const double base = f0_.value(x);
  if (!std::isfinite(base)) return kInfinity;
  return finite_or_inf(base + smooth_objective(x));
}

AnchoredModel Model::anchor(const Vector& a) const {
  const double fa = objective(a);
  if (!std::isfinite(fa)) throw UsageError("model anchor lies outside dom f");

  AnchoredModel m;
  m.kind_ = kind_;
  m.anchor_ = a;
  m.anchor_value_ = fa;
  m.f0_ = f0_;
  m.linear_ = Vector::Zero(a.size());

  switch (kind_) {
    case ModelKind::VariableMetricFB:
      m.quadratic_ = hessian_psd_part(f1_.hessian(a));
      [[fallthrough]];
    case ModelKind::ForwardBackward:
      m.constant_ = f1_.value(a);
      m.linear_ = f1_.gradient(a);
      break;
    case ModelKind::ProxLinear:
      m.has_composite_ = true;
      m.outer_ = outer_;
      m.offset_ = inner_.value(a);
      m.jacobian_ = inner_.jacobian(a);
      break;
    case ModelKind::Reweighted: {
      const Vector Fa = components_->value(a);
      const Vector w = reweight_outer_.gradient(Fa);
      if (!w.allFinite() || (w.array() < 0).any()) {
        throw DomainError("reweighted model requires grad g >= 0 at F(anchor)");
      }
      m.constant_ = reweight_outer_.value(Fa) - w.dot(Fa);
      if (!components_->is_absolute_value()) {
        m.has_reweighted_ = true;
        m.weights_ = w;
        m.components_ = SmoothMap{
            [c = *components_](const Vector& x) { return c.value(x); },
            [c = *components_](const Vector& x) { return c.jacobian(x); }};
        break;
      }
      // |x_i| is affine on the orthant and prox-friendly elsewhere.
      switch (f0_.kind()) {
        case ConvexTerm::Kind::Zero:
        case ConvexTerm::Kind::WeightedL1:
          m.f0_ = ConvexTerm::weighted_l1(f0_.weights(a.size()) + w);
          break;
        case ConvexTerm::Kind::Nonnegative:
        case ConvexTerm::Kind::Simplex:
          m.constant_ += w.dot(a);
          m.linear_ = w;
          break;
      }
      break;
    }
  }
  if (!m.linear_.allFinite()) throw DomainError("non-finite gradient at model anchor");
  return m;
}

Problem::Problem(Model model_, Geometry geometry_, Vector x0_, std::optional<double> lower_bound_)
    : model(std::move(model_)), geometry(std::move(geometry_)), x0(std::move(x0_)),
      lower_bound(lower_bound_) {
  if (!x0.allFinite()) throw UsageError("initial point has non-finite entries");
  if (!geometry.in_interior(x0)) throw UsageError("initial point must lie in int dom h");
  if (!std::isfinite(model.objective(x0))) throw UsageError("initial point must lie in dom f");
}

double model_value(const Model& model, const Vector& anchor, const Vector& x) {
  return model.anchor(anchor).value(x);
}

double growth_bound(const Model& model, double t) { return model.growth()(t); }

Matrix hessian_psd_part(const Matrix& H, double floor) {
  if (H.rows() != H.cols()) throw UsageError("hessian must be square");
  if (!H.allFinite()) throw UsageError("non-finite hessian entry");
  if (H.size() > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw UsageError("hessian must be symmetric");
  }
  const Matrix sym = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericError("hessian eigendecomposition failed");
  const Vector lambda = eig.eigenvalues().cwiseMax(floor);
  Matrix B = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (B + B.transpose());
}

}  // namespace breg
