#include "affinity/embeddings.hpp"

#include <cmath>
#include <numbers>

#include "affinity/rng.hpp"

namespace affinity {

namespace {
constexpr double kRankCutoff = 1e-10;
}

SpanProjection SpanProjection::fit(const ClusterModel& model) {
  const std::size_t k = model.k();
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "span projection needs at least two representatives");
  const auto d = static_cast<Eigen::Index>(model.dim());
  SpanProjection p;
  p.mean_ = Vector::Zero(d);
  for (const auto& c : model.representatives()) p.mean_ += c;
  p.mean_ /= static_cast<double>(k);

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(k), d);
  for (std::size_t i = 0; i < k; ++i) centered.row(static_cast<Eigen::Index>(i)) = (model.representative(i) - p.mean_).transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[0] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "representatives span nothing");
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv[rank] > kRankCutoff * sv[0]) ++rank;
  p.basis_ = svd.matrixV().leftCols(rank);
  p.singular_values_ = sv.head(rank);
  return p;
}

Vector SpanProjection::apply(const Vector& y) const {
  if (y.size() != mean_.size()) throw Error(ErrorCode::kDimensionMismatch, "projection input has the wrong dimension");
  return basis_.transpose() * (y - mean_);
}

Dataset SpanProjection::apply(const Dataset& data) const {
  std::vector<Vector> out;
  out.reserve(data.size());
  for (const auto& p : data.points()) out.push_back(apply(p));
  return Dataset(std::move(out));
}

ClusterModel SpanProjection::apply(const ClusterModel& model) const {
  std::vector<Vector> reps;
  reps.reserve(model.k());
  for (const auto& c : model.representatives()) reps.push_back(apply(c));
  return ClusterModel(std::move(reps), model.weights(), model.labels(), model.rule(), model.query_weight());
}

FourierEmbedding::FourierEmbedding(std::size_t dim, std::size_t features, double sigma, std::uint64_t seed)
    : sigma_(sigma), seed_(seed) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "embedding input dimension must be positive");
  if (features < 1) throw Error(ErrorCode::kInvalidArgument, "feature count must be positive");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  const auto rows = static_cast<Eigen::Index>(features);
  const auto cols = static_cast<Eigen::Index>(dim);
  Philox rng(seed);
  frequencies_.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) frequencies_(r, c) = rng.normal() / sigma;
  }
  phases_.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) phases_[r] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  scale_ = std::sqrt(2.0 / static_cast<double>(features));
}

Vector FourierEmbedding::embed(const Vector& y) const {
  if (y.size() != frequencies_.cols()) throw Error(ErrorCode::kDimensionMismatch, "embedding input has the wrong dimension");
  return scale_ * (frequencies_ * y + phases_).array().cos().matrix();
}

Dataset FourierEmbedding::embed(const Dataset& data) const {
  std::vector<Vector> out;
  out.reserve(data.size());
  for (const auto& p : data.points()) out.push_back(embed(p));
  return Dataset(std::move(out));
}

}  // namespace affinity
