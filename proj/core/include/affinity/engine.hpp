#pragma once

// Affinity vectors: how much of a query point's influence cell is stolen from
// each cluster, and whether one cluster claims a strict majority.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "affinity/geometry.hpp"
#include "affinity/sampler.hpp"

namespace affinity {

struct AffinityVector {
  std::vector<double> alphas;
  bool stable = false;
  double score = 0.0;  // 1 when stable, otherwise max alpha
  std::optional<std::size_t> stable_index;
  bool clipped = false;
};

struct Stability {
  bool stable = false;
  double score = 0.0;
  std::optional<std::size_t> stable_index;
};

// Samples needed so every alpha is within epsilon with probability 1 - delta:
// ceil(ln(2k / delta) / (2 epsilon^2)), Hoeffding plus a union bound over the
// k singleton ranges.
std::size_t required_samples(double epsilon, double delta, std::size_t k);

// Stable iff the largest entry strictly exceeds 1/2.
// Throws kInvalidArgument for negative entries or a sum off 1 by > 1e-9.
Stability classify_stability(const std::vector<double>& alphas);

// Indicator vector for cluster `index`, stable with score 1.
AffinityVector indicator_affinity(std::size_t k, std::size_t index);

// Builds an AffinityVector from per-cluster counts over `total` samples.
AffinityVector affinity_from_counts(const std::vector<std::size_t>& counts, std::size_t total);

// Sampled affinity of `x` against the model.
//
// A query within 1e-12 of a representative returns that indicator. A query
// that lies outside its own influence cell (a heavier site dominates it under
// power weighting) returns the indicator of its steal owner.
AffinityVector affinity_point(const Vector& x, const ClusterModel& model, const DistanceMeasure& measure,
                              const SamplerConfig& config, const Box& box);

// Same as above with explicit per-query weights.
AffinityVector affinity_point(const Vector& x, double query_weight, std::span<const double> weights,
                              const ClusterModel& model, const DistanceMeasure& measure,
                              const SamplerConfig& config, const Box& box);

// Weights used when scoring dataset point `index`: under cluster-size
// weighting the point is removed from its own cluster's count.
std::vector<double> weights_for_point(const ClusterModel& model, std::size_t index);

struct PointResult {
  std::optional<AffinityVector> value;
  std::string error;  // empty on success

  bool ok() const { return value.has_value(); }
};

struct BatchOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  double box_inflation = 2.0;
  std::optional<Box> box;  // overrides the dataset-derived box
};

// Scores every point of `data`; point i uses seed mix_seed(config.seed, i).
// Failures are reported per index and never abort the batch.
std::vector<PointResult> affinity_batch(const Dataset& data, const ClusterModel& model,
                                        const DistanceMeasure& measure, const SamplerConfig& config,
                                        const BatchOptions& options = {});

// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace affinity
