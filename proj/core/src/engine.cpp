#include "affinity/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace affinity {

std::size_t required_samples(double epsilon, double delta, std::size_t k) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in (0, 1)");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const double m = std::log(2.0 * static_cast<double>(k) / delta) / (2.0 * epsilon * epsilon);
  return static_cast<std::size_t>(std::ceil(m));
}

Stability classify_stability(const std::vector<double>& alphas) {
  if (alphas.empty()) throw Error(ErrorCode::kInvalidArgument, "affinity vector is empty");
  double sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "affinity entries must be nonnegative");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidArgument, "affinity entries must sum to 1");
  const auto it = std::max_element(alphas.begin(), alphas.end());
  const auto index = static_cast<std::size_t>(it - alphas.begin());
  if (*it > 0.5) return {true, 1.0, index};
  return {false, *it, std::nullopt};
}

AffinityVector indicator_affinity(std::size_t k, std::size_t index) {
  AffinityVector out;
  out.alphas.assign(k, 0.0);
  out.alphas[index] = 1.0;
  out.stable = true;
  out.score = 1.0;
  out.stable_index = index;
  return out;
}

AffinityVector affinity_from_counts(const std::vector<std::size_t>& counts, std::size_t total) {
  AffinityVector out;
  out.alphas.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.alphas[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  }
  const Stability s = classify_stability(out.alphas);
  out.stable = s.stable;
  out.score = s.score;
  out.stable_index = s.stable_index;
  return out;
}

AffinityVector affinity_point(const Vector& x, const ClusterModel& model, const DistanceMeasure& measure,
                              const SamplerConfig& config, const Box& box) {
  return affinity_point(x, model.query_weight(), model.weights(), model, measure, config, box);
}

AffinityVector affinity_point(const Vector& x, double query_weight, std::span<const double> weights,
                              const ClusterModel& model, const DistanceMeasure& measure,
                              const SamplerConfig& config, const Box& box) {
  config.validate();
  if (static_cast<std::size_t>(x.size()) != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dimension does not match the model");
  }
  measure.check_domain(x);
  if (const auto site = coincident_site(x, model)) return indicator_affinity(model.k(), *site);

  const InfluenceCell cell = build_influence_cell(x, query_weight, weights, model, measure, box);
  if (max_violation(cell, x) > kContainmentTol) {
    return indicator_affinity(model.k(), steal_owner(x, model, weights, measure));
  }

  Philox rng(config.seed);
  const SampleRun run = sample_polytope(cell, x, config, rng);
  std::vector<std::size_t> counts(model.k(), 0);
  for (const auto& y : run.points) ++counts[steal_owner(y, model, weights, measure)];
  AffinityVector out = affinity_from_counts(counts, run.points.size());
  out.clipped = run.touched_box;
  return out;
}

std::vector<double> weights_for_point(const ClusterModel& model, std::size_t index) {
  std::vector<double> w = model.weights();
  if (model.rule() == WeightRule::kClusterSize && model.labels() && index < model.labels()->size()) {
    const auto own = static_cast<std::size_t>((*model.labels())[index]);
    const auto sizes = model.cluster_sizes();
    const double n = static_cast<double>(model.labels()->size());
    w[own] = static_cast<double>(sizes[own] - 1) / n;
  }
  return w;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned width = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  width = static_cast<unsigned>(std::min<std::size_t>(width, count));
  if (width <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(width);
  for (unsigned w = 0; w < width; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::vector<PointResult> affinity_batch(const Dataset& data, const ClusterModel& model,
                                        const DistanceMeasure& measure, const SamplerConfig& config,
                                        const BatchOptions& options) {
  if (data.dim() != model.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "dataset and model dimensions differ");
  }
  config.validate();
  Box box;
  if (options.box) {
    box = *options.box;
  } else {
    std::vector<Vector> all = data.points();
    all.insert(all.end(), model.representatives().begin(), model.representatives().end());
    box = Box::around(all, options.box_inflation);
  }
  const bool own_labels = model.labels() && model.labels()->size() == data.size();

  std::vector<PointResult> results(data.size());
  parallel_for(data.size(), options.threads, [&](std::size_t i) {
    SamplerConfig local = config;
    local.seed = mix_seed(config.seed, i);
    try {
      if (own_labels && model.rule() == WeightRule::kClusterSize) {
        const auto w = weights_for_point(model, i);
        results[i].value = affinity_point(data[i], model.query_weight(), w, model, measure, local, box);
      } else {
        results[i].value = affinity_point(data[i], model, measure, local, box);
      }
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });
  return results;
}

}  // namespace affinity
