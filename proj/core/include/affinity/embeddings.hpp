#pragma once

// Span projection onto the affine hull of the representatives, and random
// Fourier features for the RBF kernel.

#include <cmath>
#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "affinity/geometry.hpp"

namespace affinity {

// Orthogonal projection onto the affine hull of the k representatives.
// Distances between points of the hull are preserved, and the discarded
// component is shared by a point and its influence cell, so affinity ratios
// computed after projection equal those before it.
class SpanProjection {
 public:
  // Errors: kInvalidArgument when k < 2.
  static SpanProjection fit(const ClusterModel& model);

  std::size_t input_dim() const { return static_cast<std::size_t>(mean_.size()); }
  std::size_t rank() const { return static_cast<std::size_t>(basis_.cols()); }
  const Vector& mean() const { return mean_; }
  const Eigen::MatrixXd& basis() const { return basis_; }  // d x r, orthonormal columns
  const Vector& singular_values() const { return singular_values_; }

  Vector apply(const Vector& y) const;
  Dataset apply(const Dataset& data) const;
  // Projects the representatives; weights, labels and rule carry over.
  ClusterModel apply(const ClusterModel& model) const;

 private:
  Vector mean_;
  Eigen::MatrixXd basis_;
  Vector singular_values_;
};

inline SpanProjection fit_span_projection(const ClusterModel& model) { return SpanProjection::fit(model); }
inline Vector apply_projection(const SpanProjection& p, const Vector& y) { return p.apply(y); }

// z(y) = sqrt(2 / D) cos(W y + b) with rows of W ~ N(0, I / sigma^2) and
// b ~ U[0, 2 pi); z(y) . z(y') approximates exp(-|y - y'|^2 / (2 sigma^2)).
class FourierEmbedding {
 public:
  // Errors: kInvalidArgument unless dim >= 1, features >= 1, sigma > 0.
  FourierEmbedding(std::size_t dim, std::size_t features, double sigma, std::uint64_t seed);

  std::size_t input_dim() const { return static_cast<std::size_t>(frequencies_.cols()); }
  std::size_t features() const { return static_cast<std::size_t>(frequencies_.rows()); }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Vector& phases() const { return phases_; }

  Vector embed(const Vector& y) const;
  Dataset embed(const Dataset& data) const;

 private:
  Eigen::MatrixXd frequencies_;
  Vector phases_;
  double sigma_;
  double scale_;
  std::uint64_t seed_;
};

inline FourierEmbedding fit_fourier_embedding(std::size_t dim, std::size_t features, double sigma,
                                              std::uint64_t seed) {
  return FourierEmbedding(dim, features, sigma, seed);
}

inline double rbf_kernel(const Vector& a, const Vector& b, double sigma) {
  return std::exp(-(a - b).squaredNorm() / (2.0 * sigma * sigma));
}

}  // namespace affinity
