#pragma once

// Hit-and-run sampling of influence cells.

#include <cstdint>
#include <vector>

#include "affinity/geometry.hpp"
#include "affinity/rng.hpp"

namespace affinity {

struct SamplerConfig {
  std::size_t m = 1000;        // emitted samples
  std::size_t burn_in = 1000;  // discarded steps after whitening
  std::size_t pilot_steps = 0; // 0 selects max(200, 10 * dim)
  std::uint64_t seed = 0;
  double epsilon = 0.04;
  double delta = 0.05;
  bool whiten = true;

  // Throws kInvalidArgument unless m >= 1 and epsilon, delta lie in (0, 1).
  void validate() const;
  std::size_t pilot_for(std::size_t dim) const;
};

// T(y) = A (y - shift), with the inverse linear map kept alongside.
class WhiteningTransform {
 public:
  static WhiteningTransform identity(std::size_t dim);
  static WhiteningTransform translation(const Vector& shift);
  WhiteningTransform(Eigen::MatrixXd linear, Eigen::MatrixXd inverse_linear, Vector shift);

  Vector apply(const Vector& y) const { return linear_ * (y - shift_); }
  Vector invert(const Vector& w) const { return inverse_linear_ * w + shift_; }

  const Eigen::MatrixXd& linear() const { return linear_; }
  const Eigen::MatrixXd& inverse_linear() const { return inverse_linear_; }
  const Vector& shift() const { return shift_; }
  bool is_translation_only() const { return translation_only_; }

 private:
  Eigen::MatrixXd linear_;
  Eigen::MatrixXd inverse_linear_;
  Vector shift_;
  bool translation_only_ = false;
};

// Pilot hit-and-run walk in the raw frame, then the symmetric inverse square
// root of the pilot covariance. Falls back to translation only when the
// covariance condition number exceeds 1e12.
//
// Errors: kOutsideCell when `start` is not in the cell.
WhiteningTransform estimate_whitening(const InfluenceCell& cell, const Vector& start,
                                      std::size_t pilot_steps, Philox& rng);

struct StepResult {
  Vector point;
  bool hit_box = false;  // a box face bounded the chord
};

// One hit-and-run move: a direction uniform on the sphere of the whitened
// frame, then a uniform point on the chord through z.
StepResult hit_and_run_step(const InfluenceCell& cell, const WhiteningTransform& transform,
                            const Vector& z, Philox& rng);

struct SampleRun {
  std::vector<Vector> points;
  bool touched_box = false;  // some chord during burn-in or sampling ended on a box face
};

// Whitening, `burn_in` discarded moves from `start`, then `m` consecutive
// states. Every returned point lies in the cell.
SampleRun sample_polytope(const InfluenceCell& cell, const Vector& start,
                          const SamplerConfig& config, Philox& rng);

}  // namespace affinity
