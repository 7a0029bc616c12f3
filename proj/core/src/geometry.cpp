#include "affinity/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace affinity {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kCoincidentSites: return "coincident-sites";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kBoxExcludesPoint: return "box-excludes-point";
    case ErrorCode::kOutsideCell: return "outside-cell";
    case ErrorCode::kUnboundedChord: return "unbounded-chord";
    case ErrorCode::kEmptyCell: return "empty-cell";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

Dataset::Dataset(std::vector<Vector> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::kInvalidArgument, "dataset is empty");
  dim_ = static_cast<std::size_t>(points_.front().size());
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "dataset dimension is zero");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (static_cast<std::size_t>(points_[i].size()) != dim_) {
      std::ostringstream msg;
      msg << "point " << i << " has dimension " << points_[i].size() << ", expected " << dim_;
      throw Error(ErrorCode::kDimensionMismatch, msg.str());
    }
    if (!all_finite(points_[i])) {
      throw Error(ErrorCode::kInvalidArgument, "point " + std::to_string(i) + " is not finite");
    }
  }
}

ClusterModel::ClusterModel(std::vector<Vector> representatives, std::vector<double> weights,
                           std::optional<std::vector<int>> labels, WeightRule rule,
                           double query_weight)
    : reps_(std::move(representatives)),
      weights_(std::move(weights)),
      labels_(std::move(labels)),
      rule_(rule),
      query_weight_(query_weight) {
  if (reps_.empty()) throw Error(ErrorCode::kInvalidArgument, "model needs at least one representative");
  const auto d = reps_.front().size();
  if (d == 0) throw Error(ErrorCode::kInvalidArgument, "representative dimension is zero");
  for (std::size_t i = 0; i < reps_.size(); ++i) {
    if (reps_[i].size() != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "representative " + std::to_string(i) + " has the wrong dimension");
    }
    if (!all_finite(reps_[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "representative " + std::to_string(i) + " is not finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if ((reps_[i] - reps_[j]).norm() < kCoincidenceTol) {
        throw Error(ErrorCode::kCoincidentSites, "representatives " + std::to_string(j) + " and " +
                                                     std::to_string(i) + " coincide");
      }
    }
  }
  if (weights_.empty()) weights_.assign(reps_.size(), 0.0);
  if (weights_.size() != reps_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weight count does not match representative count");
  }
  for (double w : weights_) {
    if (!std::isfinite(w)) throw Error(ErrorCode::kInvalidArgument, "weights must be finite");
  }
  if (!std::isfinite(query_weight_)) throw Error(ErrorCode::kInvalidArgument, "query weight must be finite");
  if (labels_) {
    for (std::size_t i = 0; i < labels_->size(); ++i) {
      const int l = (*labels_)[i];
      if (l < 0 || static_cast<std::size_t>(l) >= reps_.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "label " + std::to_string(l) + " at index " + std::to_string(i) + " is out of range");
      }
    }
  }
  if (rule_ == WeightRule::kClusterSize && !labels_) {
    throw Error(ErrorCode::kInvalidArgument, "cluster-size weighting requires labels");
  }
}

ClusterModel ClusterModel::from_labels(const Dataset& data, const std::vector<int>& labels,
                                       WeightRule rule) {
  if (labels.size() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "label count " + std::to_string(labels.size()) +
                                                   " does not match point count " +
                                                   std::to_string(data.size()));
  }
  if (rule == WeightRule::kExplicit) {
    throw Error(ErrorCode::kInvalidArgument, "explicit weights must be passed to the constructor");
  }
  int max_label = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative label at index " + std::to_string(i));
    }
    max_label = std::max(max_label, labels[i]);
  }
  const auto k = static_cast<std::size_t>(max_label + 1);
  std::vector<Vector> sums(k, Vector::Zero(static_cast<Eigen::Index>(data.dim())));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums[static_cast<std::size_t>(labels[i])] += data[i];
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  std::vector<double> weights(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::kInvalidArgument, "cluster " + std::to_string(c) + " has no points");
    }
    sums[c] /= static_cast<double>(counts[c]);
    if (rule == WeightRule::kClusterSize) {
      weights[c] = static_cast<double>(counts[c]) / static_cast<double>(data.size());
    }
  }
  const double query_weight =
      rule == WeightRule::kClusterSize ? 1.0 / static_cast<double>(data.size()) : 0.0;
  return ClusterModel(std::move(sums), std::move(weights), labels, rule, query_weight);
}

ClusterModel ClusterModel::shifted(double delta) const {
  std::vector<double> w = weights_;
  for (double& v : w) v += delta;
  return ClusterModel(reps_, std::move(w), labels_, WeightRule::kExplicit, query_weight_ + delta);
}

std::vector<std::size_t> ClusterModel::cluster_sizes() const {
  if (!labels_) return {};
  std::vector<std::size_t> counts(reps_.size(), 0);
  for (int l : *labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

void DistanceMeasure::check_domain(const Vector& p) const {
  if (!p.allFinite()) throw Error(ErrorCode::kDomain, "point is not finite");
  if (has_positive_domain() && (p.array() <= 0.0).any()) {
    throw Error(ErrorCode::kDomain, "generator requires strictly positive coordinates");
  }
}

double DistanceMeasure::phi(const Vector& p) const {
  switch (generator_) {
    case Generator::kSquaredNorm: return p.squaredNorm();
    case Generator::kGeneralizedKL: return (p.array() * p.array().log() - p.array()).sum();
    case Generator::kItakuraSaito: return -p.array().log().sum();
  }
  return 0.0;
}

Vector DistanceMeasure::gradient(const Vector& p) const {
  switch (generator_) {
    case Generator::kSquaredNorm: return 2.0 * p;
    case Generator::kGeneralizedKL: return p.array().log().matrix();
    case Generator::kItakuraSaito: return (-1.0 / p.array()).matrix();
  }
  return p;
}

double DistanceMeasure::divergence(const Vector& p, const Vector& q) const {
  switch (generator_) {
    case Generator::kSquaredNorm: return (p - q).squaredNorm();
    case Generator::kGeneralizedKL:
      return (p.array() * (p.array() / q.array()).log() - p.array() + q.array()).sum();
    case Generator::kItakuraSaito:
      return (p.array() / q.array() - (p.array() / q.array()).log() - 1.0).sum();
  }
  return 0.0;
}

bool Box::contains(const Vector& y, double tol) const {
  return ((y.array() >= lo.array() - tol) && (y.array() <= hi.array() + tol)).all();
}

Box Box::around(std::span<const Vector> points, double factor) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot bound an empty point set");
  if (!(factor >= 1.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::kInvalidArgument, "box inflation factor must be >= 1");
  }
  Vector lo = points.front();
  Vector hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vector center = 0.5 * (lo + hi);
  Vector half = 0.5 * (hi - lo);
  for (Eigen::Index i = 0; i < half.size(); ++i) {
    if (half[i] <= 0.0) half[i] = 0.5 * std::max(1.0, std::abs(center[i]));
  }
  return Box{center - factor * half, center + factor * half};
}

Box Box::hull(const Box& a, const Box& b) {
  return Box{a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
}

HalfSpace bisector_halfspace(const Vector& x, double w_x, const Vector& c, double w_c,
                             const DistanceMeasure& measure) {
  if (x.size() != c.size()) throw Error(ErrorCode::kDimensionMismatch, "bisector operands differ in dimension");
  if ((x - c).norm() < kCoincidenceTol) throw Error(ErrorCode::kCoincidentSites, "bisector of coincident sites");
  measure.check_domain(x);
  measure.check_domain(c);
  // Weight difference first so a common shift cancels exactly whenever the
  // shifted weights are representable.
  const double dw = w_x - w_c;
  if (measure.generator() == Generator::kSquaredNorm) {
    return HalfSpace{2.0 * (c - x), (c.squaredNorm() - x.squaredNorm()) + dw};
  }
  // D(y|x) - w_x <= D(y|c) - w_c with phi(y) cancelling:
  // (grad c - grad x) . y <= phi(x) - grad x . x - phi(c) + grad c . c + w_x - w_c
  const Vector gx = measure.gradient(x);
  const Vector gc = measure.gradient(c);
  const double b = (measure.phi(x) - gx.dot(x)) - (measure.phi(c) - gc.dot(c)) + dw;
  return HalfSpace{gc - gx, b};
}

InfluenceCell build_influence_cell(const Vector& x, const ClusterModel& model,
                                   const DistanceMeasure& measure, const Box& box) {
  return build_influence_cell(x, model.query_weight(), model.weights(), model, measure, box);
}

InfluenceCell build_influence_cell(const Vector& x, double query_weight,
                                   std::span<const double> weights, const ClusterModel& model,
                                   const DistanceMeasure& measure, const Box& box) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  if (x.size() != d || box.lo.size() != d || box.hi.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "query, model and box dimensions differ");
  }
  if (weights.size() != model.k()) {
    throw Error(ErrorCode::kInvalidArgument, "weight count does not match representative count");
  }
  if (!box.contains(x)) throw Error(ErrorCode::kBoxExcludesPoint, "bounding box does not contain the query point");

  InfluenceCell cell;
  cell.interior_point = x;
  cell.faces.reserve(model.k() + 4 * model.dim());
  for (std::size_t j = 0; j < model.k(); ++j) {
    cell.faces.push_back(
        {bisector_halfspace(x, query_weight, model.representative(j), weights[j], measure), FaceKind::kSite, j});
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    Vector e = Vector::Zero(d);
    e[i] = 1.0;
    cell.faces.push_back({HalfSpace{e, box.hi[i]}, FaceKind::kBox, 0});
    cell.faces.push_back({HalfSpace{-e, -box.lo[i]}, FaceKind::kBox, 0});
  }
  if (measure.has_positive_domain()) {
    for (Eigen::Index i = 0; i < d; ++i) {
      Vector e = Vector::Zero(d);
      e[i] = -1.0;
      cell.faces.push_back({HalfSpace{e, -kDomainFloor}, FaceKind::kDomain, 0});
    }
  }
  return cell;
}

double max_violation(const InfluenceCell& cell, const Vector& y) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : cell.faces) worst = std::max(worst, -f.halfspace.slack(y));
  return worst;
}

bool cell_contains(const InfluenceCell& cell, const Vector& y) {
  return max_violation(cell, y) <= kContainmentTol;
}

Chord chord_intersect(const InfluenceCell& cell, const Vector& z, const Vector& u) {
  Chord chord{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t i = 0; i < cell.faces.size(); ++i) {
    const auto& h = cell.faces[i].halfspace;
    double slack = h.slack(z);
    if (slack < -kContainmentTol) {
      throw Error(ErrorCode::kOutsideCell, "chord origin lies outside the cell");
    }
    slack = std::max(slack, 0.0);
    const double rate = h.normal.dot(u);
    if (rate > 0.0) {
      const double t = slack / rate;
      if (t < chord.t_max) {
        chord.t_max = t;
        chord.upper_face = i;
      }
    } else if (rate < 0.0) {
      const double t = slack / rate;
      if (t > chord.t_min) {
        chord.t_min = t;
        chord.lower_face = i;
      }
    }
  }
  if (!std::isfinite(chord.t_min) || !std::isfinite(chord.t_max)) {
    throw Error(ErrorCode::kUnboundedChord, "chord is unbounded");
  }
  return chord;
}

std::size_t steal_owner(const Vector& y, const ClusterModel& model, const DistanceMeasure& measure) {
  return steal_owner(y, model, model.weights(), measure);
}

std::size_t steal_owner(const Vector& y, const ClusterModel& model, std::span<const double> weights,
                        const DistanceMeasure& measure) {
  measure.check_domain(y);
  std::size_t best = 0;
  double best_d = measure.divergence(y, model.representative(0));
  for (std::size_t j = 1; j < model.k(); ++j) {
    const double dj = measure.divergence(y, model.representative(j));
    // Compare divergence gaps against weight gaps so a common weight shift
    // never changes the decision.
    if (dj - best_d < weights[j] - weights[best]) {
      best = j;
      best_d = dj;
    }
  }
  return best;
}

std::optional<std::size_t> coincident_site(const Vector& x, const ClusterModel& model) {
  for (std::size_t j = 0; j < model.k(); ++j) {
    if ((x - model.representative(j)).norm() < kCoincidenceTol) return j;
  }
  return std::nullopt;
}

}  // namespace affinity
