#include "affinity/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace affinity {

namespace {

constexpr double kMaxCondition = 1e12;

Vector random_direction(Eigen::Index dim, Philox& rng) {
  Vector g(dim);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dim; ++i) g[i] = rng.normal();
    norm = g.norm();
  } while (norm == 0.0);
  return g / norm;
}

// Raw-frame move along the (unnormalised) direction `dir`.
StepResult move_along(const InfluenceCell& cell, const Vector& z, const Vector& dir, Philox& rng) {
  const Vector u = dir.normalized();
  const Chord chord = chord_intersect(cell, z, u);
  const double t = rng.uniform(chord.t_min, chord.t_max);
  StepResult out{z + t * u, false};
  out.hit_box = cell.faces[chord.lower_face].kind == FaceKind::kBox ||
                cell.faces[chord.upper_face].kind == FaceKind::kBox;
  // Rounding can leave the new point a hair outside a face it landed on.
  if (max_violation(cell, out.point) > kContainmentTol) out.point = z;
  return out;
}

}  // namespace

void SamplerConfig::validate() const {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "sample count m must be at least 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
}

std::size_t SamplerConfig::pilot_for(std::size_t dim) const {
  return pilot_steps != 0 ? pilot_steps : std::max<std::size_t>(200, 10 * dim);
}

WhiteningTransform WhiteningTransform::identity(std::size_t dim) {
  return translation(Vector::Zero(static_cast<Eigen::Index>(dim)));
}

WhiteningTransform WhiteningTransform::translation(const Vector& shift) {
  const auto d = shift.size();
  WhiteningTransform t(Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Identity(d, d), shift);
  t.translation_only_ = true;
  return t;
}

WhiteningTransform::WhiteningTransform(Eigen::MatrixXd linear, Eigen::MatrixXd inverse_linear, Vector shift)
    : linear_(std::move(linear)), inverse_linear_(std::move(inverse_linear)), shift_(std::move(shift)) {}

namespace {

// One pilot pass from `z` (updated in place) with directions drawn through
// `frame`, then the symmetric whitening of the resulting sample covariance.
WhiteningTransform pilot_pass(const InfluenceCell& cell, Vector& z, std::size_t steps,
                              const WhiteningTransform& frame, Philox& rng) {
  const Eigen::Index d = z.size();
  // Each step's next point is uniform on its chord, so the chord's own
  // moments (midpoint, L^2/12 along u) replace the single landing point.
  Vector sum = Vector::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t s = 0; s < steps; ++s) {
    const Vector u = (frame.inverse_linear() * random_direction(d, rng)).normalized();
    const Chord chord = chord_intersect(cell, z, u);
    const Vector mid = z + 0.5 * (chord.t_min + chord.t_max) * u;
    const double len = chord.t_max - chord.t_min;
    sum += mid;
    second += mid * mid.transpose() + (len * len / 12.0) * u * u.transpose();
    const Vector next = z + rng.uniform(chord.t_min, chord.t_max) * u;
    if (max_violation(cell, next) <= kContainmentTol) z = next;
  }
  const double n = static_cast<double>(steps);
  const Vector mean = sum / n;
  Eigen::MatrixXd cov = second / n - mean * mean.transpose();
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) return WhiteningTransform::translation(mean);
  const Vector values = eig.eigenvalues();
  const double largest = values.maxCoeff();
  const double smallest = values.minCoeff();
  // A spread below coordinate resolution counts as singular even when the
  // walk is stuck in every direction and the ratio looks harmless.
  const double scale = std::max(1.0, mean.squaredNorm());
  const double floor = kCoincidenceTol * kCoincidenceTol * scale;
  if (!(smallest > floor) || largest / smallest > kMaxCondition) return WhiteningTransform::translation(mean);
  const Eigen::MatrixXd& basis = eig.eigenvectors();
  const Eigen::MatrixXd inv_sqrt = basis * values.cwiseSqrt().cwiseInverse().asDiagonal() * basis.transpose();
  const Eigen::MatrixXd sqrt_cov = basis * values.cwiseSqrt().asDiagonal() * basis.transpose();
  return WhiteningTransform(inv_sqrt, sqrt_cov, mean);
}

}  // namespace

WhiteningTransform estimate_whitening(const InfluenceCell& cell, const Vector& start,
                                      std::size_t pilot_steps, Philox& rng) {
  if (!cell_contains(cell, start)) throw Error(ErrorCode::kOutsideCell, "whitening start lies outside the cell");
  const std::size_t steps = std::max<std::size_t>(pilot_steps, 2);
  // A raw-frame walk crawls along long axes and underestimates them, so the
  // first estimate is refined by a second pass walked in its own frame.
  Vector z = start;
  const WhiteningTransform first =
      pilot_pass(cell, z, steps, WhiteningTransform::identity(static_cast<std::size_t>(start.size())), rng);
  if (first.is_translation_only()) return first;
  return pilot_pass(cell, z, steps, first, rng);
}

StepResult hit_and_run_step(const InfluenceCell& cell, const WhiteningTransform& transform,
                            const Vector& z, Philox& rng) {
  // A sphere direction in the whitened frame maps to inverse_linear * u in
  // the raw frame; a uniform chord point is uniform in either frame.
  const Vector u = random_direction(z.size(), rng);
  return move_along(cell, z, transform.inverse_linear() * u, rng);
}

SampleRun sample_polytope(const InfluenceCell& cell, const Vector& start, const SamplerConfig& config,
                          Philox& rng) {
  config.validate();
  if (!cell_contains(cell, start)) throw Error(ErrorCode::kOutsideCell, "sampler start lies outside the cell");
  const std::size_t d = static_cast<std::size_t>(start.size());
  const WhiteningTransform transform = config.whiten
                                           ? estimate_whitening(cell, start, config.pilot_for(d), rng)
                                           : WhiteningTransform::identity(d);
  SampleRun run;
  run.points.reserve(config.m);
  Vector z = start;
  for (std::size_t s = 0; s < config.burn_in; ++s) {
    StepResult step = hit_and_run_step(cell, transform, z, rng);
    run.touched_box |= step.hit_box;
    z = std::move(step.point);
  }
  for (std::size_t s = 0; s < config.m; ++s) {
    StepResult step = hit_and_run_step(cell, transform, z, rng);
    run.touched_box |= step.hit_box;
    z = std::move(step.point);
    run.points.push_back(z);
  }
  return run;
}

}  // namespace affinity
