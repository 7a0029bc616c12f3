#pragma once

// Sites, comparison rules, and the halfspace algebra behind influence cells.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "affinity/error.hpp"

namespace affinity {

using Vector = Eigen::VectorXd;

inline constexpr double kCoincidenceTol = 1e-12;
inline constexpr double kContainmentTol = 1e-9;
inline constexpr double kDomainFloor = 1e-9;

// n points in R^d, all finite.
class Dataset {
 public:
  explicit Dataset(std::vector<Vector> points);

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return dim_; }
  const Vector& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Vector>& points() const { return points_; }

 private:
  std::vector<Vector> points_;
  std::size_t dim_ = 0;
};

// How the singleton weight w(x) and the per-cluster weights are chosen.
enum class WeightRule {
  kNone,         // every w_i = 0, w(x) = 0
  kClusterSize,  // w_i = |C_i| / n, w(x) = 1 / n
  kExplicit,     // caller-provided w_i, w(x) = query_weight
};

// k representatives (the sites) with optional weights and labels.
class ClusterModel {
 public:
  // Throws kInvalidArgument on empty input, mismatched dimensions, non-finite
  // weights or labels outside [0, k); kCoincidentSites on duplicates.
  ClusterModel(std::vector<Vector> representatives,
               std::vector<double> weights = {},
               std::optional<std::vector<int>> labels = std::nullopt,
               WeightRule rule = WeightRule::kNone, double query_weight = 0.0);

  // Representatives are the label-group centroids. Labels must be in [0, k)
  // and every group non-empty. Weights follow `rule` (kExplicit is rejected
  // here; use the constructor).
  static ClusterModel from_labels(const Dataset& data,
                                  const std::vector<int>& labels,
                                  WeightRule rule = WeightRule::kNone);

  // Same sites and labels, every weight (and the query weight) shifted by
  // `delta`. Rule becomes kExplicit.
  ClusterModel shifted(double delta) const;

  std::size_t k() const { return reps_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(reps_.front().size()); }
  const Vector& representative(std::size_t i) const { return reps_[i]; }
  const std::vector<Vector>& representatives() const { return reps_; }
  const std::vector<double>& weights() const { return weights_; }
  double query_weight() const { return query_weight_; }
  WeightRule rule() const { return rule_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }

  // Number of labelled points per cluster; empty when no labels.
  std::vector<std::size_t> cluster_sizes() const;

 private:
  std::vector<Vector> reps_;
  std::vector<double> weights_;
  std::optional<std::vector<int>> labels_;
  WeightRule rule_;
  double query_weight_;
};

enum class Generator { kSquaredNorm, kGeneralizedKL, kItakuraSaito };

// Squared Euclidean distance or a Bregman divergence D_phi(p | q).
//
// For every supported generator the weighted comparison
// D(y, s_i) - w_i <= D(y, s_j) - w_j is linear in y, so cells stay convex
// polytopes.
class DistanceMeasure {
 public:
  static DistanceMeasure squared_euclidean() { return DistanceMeasure(false, Generator::kSquaredNorm); }
  static DistanceMeasure bregman(Generator g) { return DistanceMeasure(true, g); }

  bool is_bregman() const { return bregman_; }
  Generator generator() const { return generator_; }

  // True when the generator restricts points to the positive orthant.
  bool has_positive_domain() const {
    return generator_ == Generator::kGeneralizedKL || generator_ == Generator::kItakuraSaito;
  }

  // Throws kDomain if `p` is outside the generator's domain.
  void check_domain(const Vector& p) const;

  double phi(const Vector& p) const;
  Vector gradient(const Vector& p) const;

  // D(p, q); squared Euclidean distance for the squared-norm generator.
  double divergence(const Vector& p, const Vector& q) const;

 private:
  DistanceMeasure(bool bregman, Generator g) : bregman_(bregman), generator_(g) {}

  bool bregman_;
  Generator generator_;
};

// {y : normal . y <= offset}
struct HalfSpace {
  Vector normal;
  double offset = 0.0;

  double slack(const Vector& y) const { return offset - normal.dot(y); }
};

// Axis-aligned bounds.
struct Box {
  Vector lo;
  Vector hi;

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  bool contains(const Vector& y, double tol = 0.0) const;

  // Bounding box of `points`, inflated by `factor` about its center.
  // Zero-extent axes get a half-width of max(1, |center|) / 2 before
  // inflation.
  static Box around(std::span<const Vector> points, double factor = 2.0);
  static Box around(const Dataset& data, double factor = 2.0) {
    return around(std::span<const Vector>(data.points()), factor);
  }

  // Smallest box containing both.
  static Box hull(const Box& a, const Box& b);
};

// Provenance of each halfspace in an influence cell.
enum class FaceKind { kSite, kBox, kDomain };

struct Face {
  HalfSpace halfspace;
  FaceKind kind = FaceKind::kSite;
  std::size_t site = 0;  // meaningful for kSite only
};

// Region of influence of a query point: the intersection of its bisector
// halfspaces against every site, the box faces, and any domain faces.
struct InfluenceCell {
  std::vector<Face> faces;
  Vector interior_point;
  // Set once a sampler or exact oracle observes a box face bounding the
  // cell; build_influence_cell leaves it false.
  bool clipped = false;

  std::size_t dim() const { return static_cast<std::size_t>(interior_point.size()); }
};

// {y : D(y, x) - w_x <= D(y, c) - w_c}.
//
// Errors: kCoincidentSites when |x - c| < 1e-12, kDomain when either site
// is outside the generator's domain.
HalfSpace bisector_halfspace(const Vector& x, double w_x, const Vector& c, double w_c,
                             const DistanceMeasure& measure);

// Cell of `x` against the model's sites with the model's weights.
InfluenceCell build_influence_cell(const Vector& x, const ClusterModel& model,
                                   const DistanceMeasure& measure, const Box& box);

// Same, with per-query weights overriding the model's (used when the query
// point is removed from its own cluster before weighting).
InfluenceCell build_influence_cell(const Vector& x, double query_weight,
                                   std::span<const double> weights, const ClusterModel& model,
                                   const DistanceMeasure& measure, const Box& box);

// True iff y violates no face by more than 1e-9.
bool cell_contains(const InfluenceCell& cell, const Vector& y);

// Largest face violation (positive) or smallest slack (negative).
double max_violation(const InfluenceCell& cell, const Vector& y);

struct Chord {
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t lower_face = 0;  // index into cell.faces binding t_min
  std::size_t upper_face = 0;  // index into cell.faces binding t_max
};

// The interval of t for which z + t u stays in the cell.
//
// Errors: kOutsideCell if z violates a face by more than 1e-9,
// kUnboundedChord if no face bounds the line in one direction.
Chord chord_intersect(const InfluenceCell& cell, const Vector& z, const Vector& u);

// argmin_j D(y, c_j) - w_j; ties go to the lowest index.
std::size_t steal_owner(const Vector& y, const ClusterModel& model, const DistanceMeasure& measure);

std::size_t steal_owner(const Vector& y, const ClusterModel& model, std::span<const double> weights,
                        const DistanceMeasure& measure);

// Index of the representative within 1e-12 of x, if any.
std::optional<std::size_t> coincident_site(const Vector& x, const ClusterModel& model);

}  // namespace affinity
