#pragma once

// Case-study harnesses built on affinity scores: active clustering, consensus
// validation and incremental clustering, plus the k-means and partition
// machinery they need.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affinity/engine.hpp"
#include "affinity/geometry.hpp"
#include "affinity/rng.hpp"

namespace affinity {

// n labels in [0, k).
class Partition {
 public:
  // Throws kInvalidArgument on negative labels. k = max label + 1 unless
  // given explicitly (and then every label must be below it).
  explicit Partition(std::vector<int> labels, std::optional<std::size_t> k = std::nullopt);

  std::size_t size() const { return labels_.size(); }
  std::size_t k() const { return k_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::vector<int> labels_;
  std::size_t k_ = 0;
};

// ---------------------------------------------------------------------------
// k-means

// D^2-weighted seeding. Never picks a point already chosen while distinct
// points remain. Throws kInvalidArgument when k > n or k == 0.
std::vector<Vector> kmeanspp_seed(const Dataset& data, std::size_t k, Philox& rng);

struct KMeansResult {
  std::vector<Vector> centers;
  std::vector<int> labels;
  std::vector<double> costs;  // cost after each iteration, non-increasing
  std::size_t iterations = 0;
};

// Lloyd iterations from `centers`. An empty cluster is re-seeded from the
// point farthest from its current center.
KMeansResult lloyd(const Dataset& data, std::vector<Vector> centers, std::size_t max_iters = 100);

double kmeans_cost(const Dataset& data, const std::vector<Vector>& centers, const std::vector<int>& labels);

// Index of the nearest center, lowest index on ties.
int nearest_center(const Vector& y, const std::vector<Vector>& centers);

// ---------------------------------------------------------------------------
// Rand distance and consensus

// Fraction of point pairs co-clustered in exactly one of the partitions.
// Throws kDimensionMismatch on length mismatch. 0 for fewer than 2 points.
double rand_distance(const Partition& a, const Partition& b);

// Maximum-weight assignment on a square score matrix (Hungarian method).
// Returns assignment[row] = column.
std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& score);

// Per-point majority vote after aligning every partition's labels to the
// first one by maximum overlap. Ties go to the lowest label.
Partition majority_vote(const std::vector<Partition>& partitions);

struct ConsensusReport {
  std::vector<double> base_unstable_percent;
  double consensus_unstable_percent = 0.0;
  std::vector<double> base_rand_distance;  // to the reference
  double consensus_rand_distance = 0.0;
};

// Percentage of points scored unstable when the partition's centroids are
// the representatives.
double unstable_percent(const Dataset& data, const Partition& partition, const SamplerConfig& config,
                        const BatchOptions& options = {});

ConsensusReport consensus_report(const std::vector<Partition>& base, const Partition& consensus,
                                 const Partition& reference, const Dataset& data, const SamplerConfig& config,
                                 const BatchOptions& options = {});

// ---------------------------------------------------------------------------
// Active clustering

struct ActiveOptions {
  double alpha = 0.6;                        // stable share of the sample
  std::optional<std::size_t> total_samples;  // overrides 2 sqrt(n)
  std::size_t max_iters = 100;
};

struct ActiveResult {
  std::vector<Vector> centers;
  std::vector<int> labels;
  std::size_t stable_pool = 0;
  std::size_t unstable_pool = 0;
  std::size_t stable_requested = 0;
  std::size_t unstable_requested = 0;
  std::size_t stable_drawn = 0;
  std::size_t unstable_drawn = 0;
  std::vector<std::size_t> sample;  // indices clustered by Lloyd
};

// (ceil(2 alpha sqrt n), ceil(2 (1 - alpha) sqrt n)), or the split of
// `total` as (round(alpha total), rest) when given.
std::pair<std::size_t, std::size_t> active_sample_sizes(std::size_t n, double alpha,
                                                        std::optional<std::size_t> total = std::nullopt);

// Seeds with k-means++, scores all points, clusters a stable/unstable sample
// with Lloyd and assigns every point to its nearest resulting center. A pool
// shortfall is drawn from the other pool.
ActiveResult active_cluster(const Dataset& data, std::size_t k, const ActiveOptions& active,
                            const SamplerConfig& config, Philox& rng, const BatchOptions& options = {});

// ---------------------------------------------------------------------------
// Incremental clustering

struct BatchReport {
  std::size_t batch = 0;
  std::size_t scored = 0;       // batch points plus pool carried in
  std::size_t stable = 0;       // folded into centers during this update
  std::size_t unstable = 0;     // left in the pool after the final pass
  double unstable_percent = 0.0;
};

struct IncrementalState {
  std::vector<Vector> centers;
  std::vector<std::size_t> counts;  // points folded into each center
  std::vector<Vector> pool;         // unstable points awaiting assignment
  std::vector<double> pool_scores;
  std::size_t batches = 0;
  std::size_t seen = 0;
  std::vector<BatchReport> reports;

  std::size_t folded() const;
};

// Lloyd on the first batch; all of its points are folded.
IncrementalState init_incremental(const Dataset& first, std::size_t k, Philox& rng, std::size_t max_iters = 100);

// Scores batch ∪ pool against the current centers, folds stable points into
// their owners by weighted running means, then re-scores the remaining pool
// once against the updated centers.
IncrementalState incremental_update(IncrementalState state, const Dataset& batch, const SamplerConfig& config,
                                    const BatchOptions& options = {});

}  // namespace affinity
