#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affinity/affinity.hpp"

namespace {

using namespace affinity;

// Raised for flag combinations CLI11 cannot express; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string points;
  std::string labels;
  std::string centers;
  std::string weights = "none";
  std::string weights_file;
  std::string measure = "euclidean";
  std::string kernel;
  double sigma = 1.0;
  std::size_t rff = 500;
  double eps = 0.04;
  double delta = 0.05;
  std::optional<std::size_t> m;
  std::size_t burn_in = 1000;
  std::optional<std::uint64_t> seed;
  double box_inflate = 2.0;
  unsigned threads = 0;
  bool no_project = false;
  std::string out;

  // field
  std::string grid = "200x200";
  std::string heatmap;
  std::string contours;
  std::string csv;
  std::string levels;

  // exact2d
  std::string check;

  // kmeans / active / stream
  std::size_t k = 0;
  std::size_t max_iters = 100;
  std::string centers_out;
  double alpha = 0.6;
  std::optional<std::size_t> samples;
  std::size_t batches = 5;
  std::string report;

  // consensus-eval
  std::vector<std::string> partitions;
  std::string consensus;
  std::string reference;
};

std::uint64_t resolve_seed(const RunConfig& rc) {
  if (rc.seed) return *rc.seed;
  if (const char* env = std::getenv("AFFINITY_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("AFFINITY_SEED is not an unsigned integer: " + std::string(env));
  }
  return 0;
}

DistanceMeasure parse_measure(const std::string& name) {
  if (name == "euclidean") return DistanceMeasure::squared_euclidean();
  if (name == "kl") return DistanceMeasure::bregman(Generator::kGeneralizedKL);
  if (name == "itakura-saito") return DistanceMeasure::bregman(Generator::kItakuraSaito);
  throw UsageError("--measure: unknown measure " + name);
}

SamplerConfig sampler_config(const RunConfig& rc, std::size_t k) {
  if (!(rc.eps > 0.0 && rc.eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");
  if (!(rc.delta > 0.0 && rc.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
  SamplerConfig c;
  c.epsilon = rc.eps;
  c.delta = rc.delta;
  c.m = rc.m ? *rc.m : required_samples(rc.eps, rc.delta, k);
  if (c.m < 1) throw UsageError("--m must be at least 1");
  c.burn_in = rc.burn_in;
  c.seed = resolve_seed(rc);
  return c;
}

void log_config(const std::string& command, const RunConfig& rc, const SamplerConfig* c,
                const std::map<std::string, std::string>& extra = {}) {
  std::ostringstream line;
  line << "[affinity] command=" << command << " seed=" << resolve_seed(rc);
  if (c) line << " m=" << c->m << " burn_in=" << c->burn_in << " eps=" << c->epsilon << " delta=" << c->delta;
  line << " measure=" << rc.measure << " weights=" << rc.weights << " box_inflate=" << rc.box_inflate
       << " threads=" << rc.threads;
  if (!rc.kernel.empty()) line << " kernel=" << rc.kernel << " sigma=" << rc.sigma << " rff=" << rc.rff;
  for (const auto& [key, value] : extra) line << ' ' << key << '=' << value;
  std::cerr << line.str() << '\n';
}

Dataset load_points(const RunConfig& rc) {
  Dataset data = read_points_csv(rc.points);
  if (rc.kernel.empty()) return data;
  if (rc.kernel != "rbf") throw UsageError("--kernel: only rbf is supported");
  if (rc.measure != "euclidean") throw UsageError("--kernel requires --measure euclidean");
  const FourierEmbedding fe(data.dim(), rc.rff, rc.sigma, resolve_seed(rc));
  return fe.embed(data);
}

struct Problem {
  std::optional<Dataset> data;
  std::optional<ClusterModel> model;
  std::optional<SpanProjection> projection;
  DistanceMeasure measure = DistanceMeasure::squared_euclidean();
};

// Points plus representatives (centroids of --labels unless --centers),
// weighted per --weights, projected onto the span of the representatives
// when that lowers the dimension.
Problem load_problem(const RunConfig& rc) {
  if (rc.labels.empty() && rc.centers.empty()) throw UsageError("--labels or --centers is required");
  if (rc.weights != "none" && rc.weights != "cluster-size") throw UsageError("--weights must be none or cluster-size");
  if (rc.weights == "cluster-size" && rc.labels.empty()) throw UsageError("--weights cluster-size needs --labels");
  if (rc.weights == "cluster-size" && !rc.weights_file.empty()) {
    throw UsageError("--weights-file conflicts with --weights cluster-size");
  }
  Problem p;
  p.measure = parse_measure(rc.measure);
  p.data = load_points(rc);
  const Dataset& data = *p.data;

  std::optional<Partition> labels;
  if (!rc.labels.empty()) {
    labels = read_labels(rc.labels);
    if (labels->size() != data.size()) {
      throw Error(ErrorCode::kDimensionMismatch, rc.labels + ": " + std::to_string(labels->size()) +
                                                     " labels for " + std::to_string(data.size()) + " points");
    }
  }
  const WeightRule rule = rc.weights == "cluster-size" ? WeightRule::kClusterSize : WeightRule::kNone;
  if (!rc.centers.empty()) {
    std::vector<Vector> reps = read_points_csv(rc.centers).points();
    if (!rc.kernel.empty()) reps = FourierEmbedding(reps.front().size(), rc.rff, rc.sigma, resolve_seed(rc)).embed(Dataset(reps)).points();
    if (reps.front().size() != static_cast<Eigen::Index>(data.dim())) {
      throw Error(ErrorCode::kDimensionMismatch, rc.centers + ": center dimension differs from the points");
    }
    std::vector<double> weights;
    double query_weight = 0.0;
    std::optional<std::vector<int>> label_vec;
    if (labels) label_vec = labels->labels();
    if (rule == WeightRule::kClusterSize) {
      std::vector<std::size_t> sizes(reps.size(), 0);
      for (int l : labels->labels()) {
        if (static_cast<std::size_t>(l) >= reps.size()) throw Error(ErrorCode::kInvalidArgument, "label outside the center list");
        ++sizes[static_cast<std::size_t>(l)];
      }
      const double n = static_cast<double>(data.size());
      for (std::size_t s : sizes) weights.push_back(static_cast<double>(s) / n);
      query_weight = 1.0 / n;
    }
    p.model = ClusterModel(std::move(reps), std::move(weights), std::move(label_vec), rule, query_weight);
  } else {
    p.model = ClusterModel::from_labels(data, labels->labels(), rule);
  }
  if (!rc.weights_file.empty()) {
    const auto w = read_weights(rc.weights_file);
    if (w.size() != p.model->k()) throw Error(ErrorCode::kDimensionMismatch, rc.weights_file + ": need one weight per cluster");
    p.model = ClusterModel(p.model->representatives(), w, p.model->labels(), WeightRule::kExplicit, 0.0);
  }

  const bool euclidean = !p.measure.is_bregman();
  if (euclidean && !rc.no_project && p.model->k() >= 2 && data.dim() > p.model->k()) {
    p.projection = SpanProjection::fit(*p.model);
    p.data = p.projection->apply(data);
    p.model = p.projection->apply(*p.model);
  }
  return p;
}

Box default_box(const Problem& p, double inflation) {
  std::vector<Vector> all = p.data->points();
  all.insert(all.end(), p.model->representatives().begin(), p.model->representatives().end());
  return Box::around(all, inflation);
}

std::vector<double> parse_levels(const std::string& text) {
  if (text.empty()) return kDefaultContourLevels;
  std::vector<double> levels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      levels.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--levels: cannot parse '" + item + "'");
    }
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0) || (i > 0 && !(levels[i] > levels[i - 1]))) {
      throw UsageError("--levels must be strictly increasing values in (0, 1)");
    }
  }
  return levels;
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0;
    std::size_t b = 0;
    const auto w = std::stoul(text.substr(0, x), &a);
    const auto h = std::stoul(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1 || w < 2 || h < 2) throw std::invalid_argument(text);
    return {w, h};
  } catch (const std::exception&) {
    throw UsageError("--grid expects WxH with W, H >= 2, got '" + text + "'");
  }
}

BatchOptions batch_options(const RunConfig& rc) {
  BatchOptions o;
  o.threads = rc.threads;
  o.box_inflation = rc.box_inflate;
  return o;
}

int run_affinity(const RunConfig& rc) {
  const Problem p = load_problem(rc);
  const SamplerConfig config = sampler_config(rc, p.model->k());
  log_config("affinity", rc, &config, {{"n", std::to_string(p.data->size())}, {"k", std::to_string(p.model->k())},
                                       {"dim", std::to_string(p.data->dim())}});
  const auto results = affinity_batch(*p.data, *p.model, p.measure, config, batch_options(rc));
  std::size_t failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) {
      ++failed;
      std::cerr << "[affinity] point " << i << ": " << results[i].error << '\n';
    }
  }
  if (rc.out.empty()) {
    write_affinity_csv(std::cout, results, p.model->k());
  } else {
    write_affinity_csv(rc.out, results, p.model->k());
  }
  return failed == 0 ? 0 : 1;
}

int run_field(const RunConfig& rc) {
  const Problem p = load_problem(rc);
  if (p.data->dim() != 2) throw UsageError("field needs two-dimensional data after projection");
  const auto [nx, ny] = parse_grid(rc.grid);
  const auto levels = parse_levels(rc.levels);
  const SamplerConfig config = sampler_config(rc, p.model->k());
  log_config("field", rc, &config, {{"grid", rc.grid}});

  std::vector<Vector> all = p.data->points();
  all.insert(all.end(), p.model->representatives().begin(), p.model->representatives().end());
  const Box extent = Box::around(all, 1.1);
  const GridSpec spec{extent.lo[0], extent.hi[0], extent.lo[1], extent.hi[1], nx, ny};
  FieldOptions options;
  options.threads = rc.threads;
  options.box_inflation = rc.box_inflate;
  const auto grid = evaluate_affinity_field(*p.model, p.measure, config, spec, options);
  if (!rc.heatmap.empty()) write_heatmap_pgm(grid, rc.heatmap);
  if (!rc.contours.empty()) write_contours_svg(grid, extract_contours(grid, levels), rc.contours);
  if (!rc.csv.empty()) write_field_csv(grid, rc.csv);
  if (rc.heatmap.empty() && rc.contours.empty() && rc.csv.empty()) {
    throw UsageError("field needs at least one of --heatmap, --contours, --csv");
  }
  return 0;
}

int run_exact2d(const RunConfig& rc) {
  const Problem p = load_problem(rc);
  if (p.measure.is_bregman()) throw UsageError("exact2d supports --measure euclidean only");
  if (p.data->dim() != 2) throw UsageError("exact2d needs two-dimensional data");
  log_config("exact2d", rc, nullptr);
  const Box box = default_box(p, rc.box_inflate);
  const bool own = p.model->rule() == WeightRule::kClusterSize && p.model->labels();
  std::vector<PointResult> results(p.data->size());
  parallel_for(p.data->size(), rc.threads, [&](std::size_t i) {
    try {
      const auto w = own ? weights_for_point(*p.model, i) : p.model->weights();
      results[i].value = exact_affinity_2d_detail((*p.data)[i], p.model->query_weight(), w, *p.model, box).affinity;
    } catch (const std::exception& e) {
      results[i].error = e.what();
    }
  });
  if (!rc.out.empty()) write_affinity_csv(rc.out, results, p.model->k());
  if (rc.check.empty()) {
    if (rc.out.empty()) write_affinity_csv(std::cout, results, p.model->k());
    return 0;
  }
  const auto rows = read_affinity_csv(rc.check);
  double worst = 0.0;
  std::size_t compared = 0;
  bool missing = false;
  for (const auto& row : rows) {
    if (row.id >= results.size() || !results[row.id].ok()) {
      std::cerr << "[exact2d] no exact value for id " << row.id << '\n';
      missing = true;
      continue;
    }
    const auto& exact = results[row.id].value->alphas;
    if (row.alphas.size() != exact.size()) throw Error(ErrorCode::kParse, rc.check + ": cluster count differs");
    for (std::size_t j = 0; j < exact.size(); ++j) worst = std::max(worst, std::abs(row.alphas[j] - exact[j]));
    ++compared;
  }
  std::cout << "compared " << compared << " points, max alpha deviation " << format_real(worst) << '\n';
  return !missing && worst <= rc.eps ? 0 : 1;
}

int run_kmeans(const RunConfig& rc) {
  if (rc.k == 0) throw UsageError("--k is required");
  const Dataset data = load_points(rc);
  log_config("kmeans", rc, nullptr, {{"k", std::to_string(rc.k)}});
  Philox rng(resolve_seed(rc));
  const auto fit = lloyd(data, kmeanspp_seed(data, rc.k, rng), rc.max_iters);
  std::cerr << "[kmeans] iterations=" << fit.iterations << " cost=" << format_real(fit.costs.back()) << '\n';
  if (!rc.centers_out.empty()) write_points_csv(rc.centers_out, fit.centers);
  if (rc.out.empty()) {
    for (int l : fit.labels) std::cout << l << '\n';
  } else {
    write_labels(rc.out, fit.labels);
  }
  return 0;
}

int run_active(const RunConfig& rc) {
  if (rc.k == 0) throw UsageError("--k is required");
  if (!(rc.alpha > 0.0 && rc.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const Dataset data = load_points(rc);
  const SamplerConfig config = sampler_config(rc, rc.k);
  log_config("active", rc, &config, {{"k", std::to_string(rc.k)}, {"alpha", format_real(rc.alpha)}});
  ActiveOptions options;
  options.alpha = rc.alpha;
  options.total_samples = rc.samples;
  options.max_iters = rc.max_iters;
  Philox rng(mix_seed(config.seed, 0xac71));
  const auto result = active_cluster(data, rc.k, options, config, rng, batch_options(rc));
  if (rc.out.empty()) {
    for (int l : result.labels) std::cout << l << '\n';
  } else {
    write_labels(rc.out, result.labels);
  }
  if (!rc.centers_out.empty()) write_points_csv(rc.centers_out, result.centers);
  if (!rc.report.empty()) {
    write_report_csv(rc.report, {{"n", std::to_string(data.size())},
                                 {"stable_pool", std::to_string(result.stable_pool)},
                                 {"unstable_pool", std::to_string(result.unstable_pool)},
                                 {"stable_requested", std::to_string(result.stable_requested)},
                                 {"unstable_requested", std::to_string(result.unstable_requested)},
                                 {"stable_drawn", std::to_string(result.stable_drawn)},
                                 {"unstable_drawn", std::to_string(result.unstable_drawn)}});
  }
  return 0;
}

int run_stream(const RunConfig& rc) {
  if (rc.k == 0) throw UsageError("--k is required");
  if (rc.batches < 1) throw UsageError("--batches must be at least 1");
  const Dataset data = load_points(rc);
  if (data.size() < rc.batches) throw UsageError("--batches exceeds the number of points");
  const SamplerConfig config = sampler_config(rc, rc.k);
  log_config("stream", rc, &config, {{"k", std::to_string(rc.k)}, {"batches", std::to_string(rc.batches)}});
  // Consecutive, near-equal slices of the input in file order.
  std::vector<Dataset> slices;
  for (std::size_t b = 0; b < rc.batches; ++b) {
    const std::size_t lo = b * data.size() / rc.batches;
    const std::size_t hi = (b + 1) * data.size() / rc.batches;
    slices.emplace_back(std::vector<Vector>(data.points().begin() + static_cast<std::ptrdiff_t>(lo),
                                            data.points().begin() + static_cast<std::ptrdiff_t>(hi)));
  }
  Philox rng(mix_seed(config.seed, 0x57e4));
  auto state = init_incremental(slices[0], rc.k, rng, rc.max_iters);
  for (std::size_t b = 1; b < slices.size(); ++b) state = incremental_update(std::move(state), slices[b], config, batch_options(rc));
  if (rc.out.empty()) {
    for (const auto& c : state.centers) {
      for (Eigen::Index j = 0; j < c.size(); ++j) std::cout << (j ? "," : "") << format_real(c[j]);
      std::cout << '\n';
    }
  } else {
    write_points_csv(rc.out, state.centers);
  }
  if (!rc.report.empty()) {
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& r : state.reports) {
      const std::string prefix = "batch_" + std::to_string(r.batch) + "_";
      rows.emplace_back(prefix + "scored", std::to_string(r.scored));
      rows.emplace_back(prefix + "stable", std::to_string(r.stable));
      rows.emplace_back(prefix + "unstable", std::to_string(r.unstable));
      rows.emplace_back(prefix + "unstable_percent", format_real(r.unstable_percent));
    }
    rows.emplace_back("pool", std::to_string(state.pool.size()));
    rows.emplace_back("seen", std::to_string(state.seen));
    write_report_csv(rc.report, rows);
  }
  return 0;
}

int run_consensus(const RunConfig& rc) {
  if (rc.partitions.empty()) throw UsageError("--partitions needs at least one label file");
  if (rc.reference.empty()) throw UsageError("--reference is required");
  const Dataset data = load_points(rc);
  std::vector<Partition> base;
  for (const auto& path : rc.partitions) base.push_back(read_labels(path));
  const Partition consensus = rc.consensus.empty() ? majority_vote(base) : read_labels(rc.consensus);
  const Partition reference = read_labels(rc.reference);
  const SamplerConfig config = sampler_config(rc, consensus.k());
  log_config("consensus-eval", rc, &config, {{"partitions", std::to_string(base.size())},
                                             {"consensus", rc.consensus.empty() ? "majority-vote" : rc.consensus}});
  const auto report = consensus_report(base, consensus, reference, data, config, batch_options(rc));
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t i = 0; i < base.size(); ++i) {
    rows.emplace_back("base_" + std::to_string(i) + "_unstable_percent", format_real(report.base_unstable_percent[i]));
    rows.emplace_back("base_" + std::to_string(i) + "_rand_distance", format_real(report.base_rand_distance[i]));
  }
  rows.emplace_back("consensus_unstable_percent", format_real(report.consensus_unstable_percent));
  rows.emplace_back("consensus_rand_distance", format_real(report.consensus_rand_distance));
  if (rc.report.empty()) {
    std::cout << "metric,value\n";
    for (const auto& [key, value] : rows) std::cout << key << ',' << value << '\n';
  } else {
    write_report_csv(rc.report, rows);
  }
  return 0;
}

int run_samplesize(const RunConfig& rc) {
  if (rc.k == 0) throw UsageError("--k is required");
  if (!(rc.eps > 0.0 && rc.eps < 1.0)) throw UsageError("--eps must lie in (0, 1)");
  if (!(rc.delta > 0.0 && rc.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
  std::cout << required_samples(rc.eps, rc.delta, rc.k) << '\n';
  return 0;
}

void add_sampling(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--eps", rc.eps, "target additive error (sets m when --m is absent)");
  cmd->add_option("--delta", rc.delta, "failure probability");
  cmd->add_option("--m", rc.m, "samples per point");
  cmd->add_option("--burn-in", rc.burn_in, "hit-and-run burn-in steps");
  cmd->add_option("--threads", rc.threads, "parallel width (0 = all cores)");
  cmd->add_option("--box-inflate", rc.box_inflate, "bounding box inflation factor")->check(CLI::PositiveNumber);
}

void add_points(CLI::App* cmd, RunConfig& rc) {
  cmd->add_option("--points", rc.points, "points CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", rc.seed, "seed (default: $AFFINITY_SEED, else 0)");
  cmd->add_option("--kernel", rc.kernel, "lift points with a kernel embedding (rbf)");
  cmd->add_option("--sigma", rc.sigma, "rbf bandwidth")->check(CLI::PositiveNumber);
  cmd->add_option("--rff", rc.rff, "random Fourier feature count")->check(CLI::PositiveNumber);
}

void add_model(CLI::App* cmd, RunConfig& rc) {
  add_points(cmd, rc);
  cmd->add_option("--labels", rc.labels, "label file, one integer per line")->check(CLI::ExistingFile);
  cmd->add_option("--centers", rc.centers, "representatives CSV (default: label centroids)")->check(CLI::ExistingFile);
  cmd->add_option("--weights", rc.weights, "none | cluster-size");
  cmd->add_option("--weights-file", rc.weights_file, "one weight per cluster")->check(CLI::ExistingFile);
  cmd->add_option("--measure", rc.measure, "euclidean | kl | itakura-saito");
  cmd->add_flag("--no-project", rc.no_project, "skip span projection when d > k");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Affinity scores for clusterings"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* affinity = app.add_subcommand("affinity", "affinity score of every point");
  add_model(affinity, rc);
  add_sampling(affinity, rc);
  affinity->add_option("--out", rc.out, "output CSV (default stdout)");

  auto* field = app.add_subcommand("field", "affinity field on a grid");
  add_model(field, rc);
  add_sampling(field, rc);
  field->add_option("--grid", rc.grid, "WxH grid nodes");
  field->add_option("--heatmap", rc.heatmap, "PGM output");
  field->add_option("--contours", rc.contours, "SVG output");
  field->add_option("--csv", rc.csv, "x,y,score CSV output");
  field->add_option("--levels", rc.levels, "comma-separated contour levels");

  auto* exact = app.add_subcommand("exact2d", "exact planar affinities");
  add_model(exact, rc);
  exact->add_option("--box-inflate", rc.box_inflate, "bounding box inflation factor")->check(CLI::PositiveNumber);
  exact->add_option("--threads", rc.threads, "parallel width (0 = all cores)");
  exact->add_option("--out", rc.out, "output CSV");
  exact->add_option("--check", rc.check, "affinity CSV to compare against")->check(CLI::ExistingFile);
  exact->add_option("--eps", rc.eps, "allowed max alpha deviation for --check");

  auto* kmeans = app.add_subcommand("kmeans", "k-means++ and Lloyd");
  add_points(kmeans, rc);
  kmeans->add_option("--k", rc.k, "cluster count")->required();
  kmeans->add_option("--max-iters", rc.max_iters, "Lloyd iteration cap");
  kmeans->add_option("--out", rc.out, "label file (default stdout)");
  kmeans->add_option("--centers-out", rc.centers_out, "centers CSV");

  auto* active = app.add_subcommand("active", "active clustering from stable and unstable samples");
  add_points(active, rc);
  add_sampling(active, rc);
  active->add_option("--k", rc.k, "cluster count")->required();
  active->add_option("--alpha", rc.alpha, "stable share of the sample");
  active->add_option("--samples", rc.samples, "total sample size (default 2 sqrt(n))");
  active->add_option("--max-iters", rc.max_iters, "Lloyd iteration cap");
  active->add_option("--out", rc.out, "label file (default stdout)");
  active->add_option("--centers-out", rc.centers_out, "centers CSV");
  active->add_option("--report", rc.report, "run report CSV");

  auto* stream = app.add_subcommand("stream", "incremental clustering over consecutive batches");
  add_points(stream, rc);
  add_sampling(stream, rc);
  stream->add_option("--k", rc.k, "cluster count")->required();
  stream->add_option("--batches", rc.batches, "number of consecutive batches");
  stream->add_option("--max-iters", rc.max_iters, "Lloyd iteration cap for the first batch");
  stream->add_option("--out", rc.out, "final centers CSV (default stdout)");
  stream->add_option("--report", rc.report, "per-batch report CSV");

  auto* consensus = app.add_subcommand("consensus-eval", "unstable points of base and consensus partitions");
  add_points(consensus, rc);
  add_sampling(consensus, rc);
  consensus->add_option("--partitions", rc.partitions, "base label files")->required()->check(CLI::ExistingFile);
  consensus->add_option("--consensus", rc.consensus, "consensus label file (default: majority vote)")
      ->check(CLI::ExistingFile);
  consensus->add_option("--reference", rc.reference, "reference label file")->required()->check(CLI::ExistingFile);
  consensus->add_option("--report", rc.report, "report CSV (default stdout)");

  auto* samplesize = app.add_subcommand("samplesize", "samples needed for a given eps, delta, k");
  samplesize->add_option("--eps", rc.eps, "target additive error");
  samplesize->add_option("--delta", rc.delta, "failure probability");
  samplesize->add_option("--k", rc.k, "cluster count")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (affinity->parsed()) return run_affinity(rc);
    if (field->parsed()) return run_field(rc);
    if (exact->parsed()) return run_exact2d(rc);
    if (kmeans->parsed()) return run_kmeans(rc);
    if (active->parsed()) return run_active(rc);
    if (stream->parsed()) return run_stream(rc);
    if (consensus->parsed()) return run_consensus(rc);
    if (samplesize->parsed()) return run_samplesize(rc);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
