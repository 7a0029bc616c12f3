#include "affinity/apps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace affinity {

Partition::Partition(std::vector<int> labels, std::optional<std::size_t> k) : labels_(std::move(labels)) {
  int max_label = -1;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0) throw Error(ErrorCode::kInvalidArgument, "negative label at index " + std::to_string(i));
    max_label = std::max(max_label, labels_[i]);
  }
  k_ = static_cast<std::size_t>(max_label + 1);
  if (k) {
    if (*k < k_) throw Error(ErrorCode::kInvalidArgument, "label exceeds the declared cluster count");
    k_ = *k;
  }
}

// ---------------------------------------------------------------------------
// k-means

int nearest_center(const Vector& y, const std::vector<Vector>& centers) {
  int best = 0;
  double best_d = (y - centers[0]).squaredNorm();
  for (std::size_t j = 1; j < centers.size(); ++j) {
    const double dj = (y - centers[j]).squaredNorm();
    if (dj < best_d) {
      best_d = dj;
      best = static_cast<int>(j);
    }
  }
  return best;
}

std::vector<Vector> kmeanspp_seed(const Dataset& data, std::size_t k, Philox& rng) {
  const std::size_t n = data.size();
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (k > n) throw Error(ErrorCode::kInvalidArgument, "k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  std::vector<Vector> centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  centers.push_back(data[first]);
  chosen[first] = true;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = (data[i] - centers[0]).squaredNorm();

  while (centers.size() < k) {
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (dist[i] <= 0.0) continue;
        pick = i;
        target -= dist[i];
        if (target < 0.0) break;
      }
    } else {
      // Only duplicates of chosen points remain.
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) rest.push_back(i);
      }
      pick = rest[static_cast<std::size_t>(rng.below(rest.size()))];
    }
    chosen[pick] = true;
    centers.push_back(data[pick]);
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], (data[i] - centers.back()).squaredNorm());
  }
  return centers;
}

double kmeans_cost(const Dataset& data, const std::vector<Vector>& centers, const std::vector<int>& labels) {
  double cost = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) cost += (data[i] - centers[static_cast<std::size_t>(labels[i])]).squaredNorm();
  return cost;
}

KMeansResult lloyd(const Dataset& data, std::vector<Vector> centers, std::size_t max_iters) {
  if (centers.empty()) throw Error(ErrorCode::kInvalidArgument, "Lloyd needs at least one center");
  if (centers.size() > data.size()) throw Error(ErrorCode::kInvalidArgument, "more centers than points");
  const std::size_t n = data.size();
  const std::size_t k = centers.size();
  const auto d = static_cast<Eigen::Index>(data.dim());
  KMeansResult out;
  out.labels.assign(n, -1);
  for (std::size_t iter = 0; iter < std::max<std::size_t>(max_iters, 1); ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = nearest_center(data[i], centers);
      changed |= l != out.labels[i];
      out.labels[i] = l;
    }
    out.costs.push_back(kmeans_cost(data, centers, out.labels));
    out.iterations = iter + 1;
    if (!changed && iter > 0) break;

    std::vector<Vector> sums(k, Vector::Zero(d));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[static_cast<std::size_t>(out.labels[i])] += data[i];
      ++counts[static_cast<std::size_t>(out.labels[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double di = (data[i] - centers[static_cast<std::size_t>(out.labels[i])]).squaredNorm();
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      centers[c] = data[far];
      out.labels[far] = static_cast<int>(c);
    }
  }
  out.centers = std::move(centers);
  return out;
}

// ---------------------------------------------------------------------------
// Rand distance and consensus

double rand_distance(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "partitions cover different point counts");
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  std::vector<double> table(a.k() * b.k(), 0.0);
  std::vector<double> rows(a.k(), 0.0);
  std::vector<double> cols(b.k(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ra = static_cast<std::size_t>(a[i]);
    const auto cb = static_cast<std::size_t>(b[i]);
    table[ra * b.k() + cb] += 1.0;
    rows[ra] += 1.0;
    cols[cb] += 1.0;
  }
  double same_a = 0.0, same_b = 0.0, same_both = 0.0;
  for (double r : rows) same_a += pairs(r);
  for (double c : cols) same_b += pairs(c);
  for (double t : table) same_both += pairs(t);
  return (same_a + same_b - 2.0 * same_both) / pairs(static_cast<double>(n));
}

std::vector<std::size_t> hungarian_max(const std::vector<std::vector<double>>& score) {
  const std::size_t n = score.size();
  if (n == 0) return {};
  double top = 0.0;
  for (const auto& row : score) {
    if (row.size() != n) throw Error(ErrorCode::kInvalidArgument, "assignment matrix must be square");
    for (double v : row) top = std::max(top, v);
  }
  // Shortest augmenting path form with potentials on 1-based indices.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = (top - score[r0 - 1][c - 1]) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t c = 1; c <= n; ++c) assignment[match[c] - 1] = c - 1;
  return assignment;
}

Partition majority_vote(const std::vector<Partition>& partitions) {
  if (partitions.empty()) throw Error(ErrorCode::kInvalidArgument, "majority vote needs at least one partition");
  const std::size_t n = partitions.front().size();
  std::size_t k = 0;
  for (const auto& p : partitions) {
    if (p.size() != n) throw Error(ErrorCode::kDimensionMismatch, "partitions cover different point counts");
    k = std::max(k, p.k());
  }
  const Partition& ref = partitions.front();
  std::vector<std::vector<std::size_t>> votes(n, std::vector<std::size_t>(k, 0));
  for (const auto& p : partitions) {
    std::vector<std::vector<double>> overlap(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < n; ++i) overlap[static_cast<std::size_t>(p[i])][static_cast<std::size_t>(ref[i])] += 1.0;
    const auto map = hungarian_max(overlap);
    for (std::size_t i = 0; i < n; ++i) ++votes[i][map[static_cast<std::size_t>(p[i])]];
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(std::max_element(votes[i].begin(), votes[i].end()) - votes[i].begin());
  }
  return Partition(std::move(labels), k);
}

namespace {

// Relabels to 0..m-1 in increasing label order, dropping unused labels.
std::vector<int> compact_labels(const Partition& p) {
  std::vector<int> remap(p.k(), -1);
  for (int l : p.labels()) remap[static_cast<std::size_t>(l)] = 0;
  int next = 0;
  for (auto& r : remap) {
    if (r == 0) r = next++;
  }
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = remap[static_cast<std::size_t>(p[i])];
  return out;
}

}  // namespace

double unstable_percent(const Dataset& data, const Partition& partition, const SamplerConfig& config,
                        const BatchOptions& options) {
  if (partition.size() != data.size()) throw Error(ErrorCode::kDimensionMismatch, "partition and data sizes differ");
  const ClusterModel model = ClusterModel::from_labels(data, compact_labels(partition));
  const auto results = affinity_batch(data, model, DistanceMeasure::squared_euclidean(), config, options);
  std::size_t unstable = 0;
  for (const auto& r : results) {
    if (!r.ok()) throw Error(ErrorCode::kInvalidArgument, "affinity failed: " + r.error);
    if (!r.value->stable) ++unstable;
  }
  return 100.0 * static_cast<double>(unstable) / static_cast<double>(data.size());
}

ConsensusReport consensus_report(const std::vector<Partition>& base, const Partition& consensus,
                                 const Partition& reference, const Dataset& data, const SamplerConfig& config,
                                 const BatchOptions& options) {
  ConsensusReport report;
  for (const auto& p : base) {
    report.base_unstable_percent.push_back(unstable_percent(data, p, config, options));
    report.base_rand_distance.push_back(rand_distance(p, reference));
  }
  report.consensus_unstable_percent = unstable_percent(data, consensus, config, options);
  report.consensus_rand_distance = rand_distance(consensus, reference);
  return report;
}

// ---------------------------------------------------------------------------
// Active clustering

std::pair<std::size_t, std::size_t> active_sample_sizes(std::size_t n, double alpha, std::optional<std::size_t> total) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in (0, 1)");
  if (total) {
    const auto stable = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(*total)));
    return {stable, *total - stable};
  }
  // The small slack keeps products like 2 * 0.8 * 100 from rounding up.
  const double root = std::sqrt(static_cast<double>(n));
  const auto stable = static_cast<std::size_t>(std::ceil(2.0 * alpha * root - 1e-9));
  const auto unstable = static_cast<std::size_t>(std::ceil(2.0 * (1.0 - alpha) * root - 1e-9));
  return {stable, unstable};
}

namespace {

// `count` distinct elements of `pool`, uniformly, by partial Fisher-Yates.
std::vector<std::size_t> draw(std::vector<std::size_t> pool, std::size_t count, Philox& rng) {
  count = std::min(count, pool.size());
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

ActiveResult active_cluster(const Dataset& data, std::size_t k, const ActiveOptions& active,
                            const SamplerConfig& config, Philox& rng, const BatchOptions& options) {
  const std::size_t n = data.size();
  ActiveResult out;
  std::vector<Vector> seeds = kmeanspp_seed(data, k, rng);
  const ClusterModel model(seeds);
  const auto scores = affinity_batch(data, model, DistanceMeasure::squared_euclidean(), config, options);

  std::vector<std::size_t> stable, unstable;
  for (std::size_t i = 0; i < n; ++i) {
    if (scores[i].ok() && scores[i].value->stable) {
      stable.push_back(i);
    } else {
      unstable.push_back(i);
    }
  }
  out.stable_pool = stable.size();
  out.unstable_pool = unstable.size();
  const auto [want_stable, want_unstable] = active_sample_sizes(n, active.alpha, active.total_samples);
  out.stable_requested = want_stable;
  out.unstable_requested = want_unstable;

  std::size_t take_stable = std::min(want_stable, stable.size());
  std::size_t take_unstable = std::min(want_unstable, unstable.size());
  // Shortfall in one pool is drawn from the other.
  take_unstable = std::min(unstable.size(), take_unstable + (want_stable - take_stable));
  take_stable = std::min(stable.size(), take_stable + (want_unstable - std::min(want_unstable, unstable.size())));

  const auto from_stable = draw(stable, take_stable, rng);
  const auto from_unstable = draw(unstable, take_unstable, rng);
  out.stable_drawn = from_stable.size();
  out.unstable_drawn = from_unstable.size();
  out.sample = from_stable;
  out.sample.insert(out.sample.end(), from_unstable.begin(), from_unstable.end());
  if (out.sample.size() < k) throw Error(ErrorCode::kInvalidArgument, "active sample is smaller than k");

  std::vector<Vector> sample_points;
  sample_points.reserve(out.sample.size());
  for (std::size_t i : out.sample) sample_points.push_back(data[i]);
  const KMeansResult fit = lloyd(Dataset(std::move(sample_points)), std::move(seeds), active.max_iters);
  out.centers = fit.centers;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = nearest_center(data[i], out.centers);
  return out;
}

// ---------------------------------------------------------------------------
// Incremental clustering

std::size_t IncrementalState::folded() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

IncrementalState init_incremental(const Dataset& first, std::size_t k, Philox& rng, std::size_t max_iters) {
  IncrementalState state;
  const KMeansResult fit = lloyd(first, kmeanspp_seed(first, k, rng), max_iters);
  state.centers = fit.centers;
  state.counts.assign(k, 0);
  for (int l : fit.labels) ++state.counts[static_cast<std::size_t>(l)];
  state.batches = 1;
  state.seen = first.size();
  state.reports.push_back({0, first.size(), first.size(), 0, 0.0});
  return state;
}

namespace {

struct PassResult {
  std::vector<Vector> unstable;
  std::vector<double> unstable_scores;
  std::size_t folded = 0;
};

// Scores `points` against the current centers and folds the stable ones.
PassResult score_and_fold(IncrementalState& state, const std::vector<Vector>& points, const SamplerConfig& config,
                          const BatchOptions& options) {
  PassResult out;
  if (points.empty()) return out;
  const ClusterModel model(state.centers);
  BatchOptions local = options;
  if (!local.box) {
    std::vector<Vector> all = points;
    all.insert(all.end(), state.centers.begin(), state.centers.end());
    local.box = Box::around(all, options.box_inflation);
  }
  const auto results = affinity_batch(Dataset(points), model, DistanceMeasure::squared_euclidean(), config, local);
  const auto d = state.centers.front().size();
  std::vector<Vector> sums(state.centers.size(), Vector::Zero(d));
  std::vector<std::size_t> added(state.centers.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& r = results[i];
    if (r.ok() && r.value->stable) {
      const std::size_t owner = *r.value->stable_index;
      sums[owner] += points[i];
      ++added[owner];
      ++out.folded;
    } else {
      out.unstable.push_back(points[i]);
      out.unstable_scores.push_back(r.ok() ? r.value->score : 0.0);
    }
  }
  for (std::size_t c = 0; c < state.centers.size(); ++c) {
    if (added[c] == 0) continue;
    const double total = static_cast<double>(state.counts[c] + added[c]);
    state.centers[c] = (static_cast<double>(state.counts[c]) * state.centers[c] + sums[c]) / total;
    state.counts[c] += added[c];
  }
  return out;
}

}  // namespace

IncrementalState incremental_update(IncrementalState state, const Dataset& batch, const SamplerConfig& config,
                                    const BatchOptions& options) {
  if (state.centers.empty()) throw Error(ErrorCode::kInvalidArgument, "incremental state is not initialised");
  if (batch.dim() != static_cast<std::size_t>(state.centers.front().size())) {
    throw Error(ErrorCode::kDimensionMismatch, "batch dimension does not match the centers");
  }
  std::vector<Vector> candidates = batch.points();
  candidates.insert(candidates.end(), state.pool.begin(), state.pool.end());
  BatchReport report{state.batches, candidates.size(), 0, 0, 0.0};

  SamplerConfig first = config;
  first.seed = mix_seed(config.seed, 2 * state.batches);
  PassResult pass = score_and_fold(state, candidates, first, options);
  report.stable += pass.folded;

  SamplerConfig second = config;
  second.seed = mix_seed(config.seed, 2 * state.batches + 1);
  PassResult recheck = score_and_fold(state, pass.unstable, second, options);
  report.stable += recheck.folded;

  state.pool = std::move(recheck.unstable);
  state.pool_scores = std::move(recheck.unstable_scores);
  state.seen += batch.size();
  ++state.batches;
  report.unstable = state.pool.size();
  report.unstable_percent = 100.0 * static_cast<double>(report.unstable) / static_cast<double>(report.scored);
  state.reports.push_back(report);
  return state;
}

}  // namespace affinity
