#include "affinity/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace affinity {

namespace {

constexpr double kMergeTol = 1e-12;

bool on_box_edge(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const Box& box) {
  const double tol = 1e-9 * std::max(1.0, (box.hi - box.lo).maxCoeff());
  for (int axis = 0; axis < 2; ++axis) {
    for (double bound : {box.lo[axis], box.hi[axis]}) {
      if (std::abs(p[axis] - bound) < tol && std::abs(q[axis] - bound) < tol && (p - q).norm() > tol) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

ConvexPolygon ConvexPolygon::from_box(const Box& box) {
  if (box.dim() != 2) throw Error(ErrorCode::kDimensionMismatch, "polygon boxes are two-dimensional");
  return ConvexPolygon{{{box.lo[0], box.lo[1]}, {box.hi[0], box.lo[1]}, {box.hi[0], box.hi[1]}, {box.lo[0], box.hi[1]}}};
}

ConvexPolygon clip_polygon(const ConvexPolygon& poly, const HalfSpace& h) {
  ConvexPolygon out;
  if (poly.vertices.empty()) return out;
  const Eigen::Vector2d a(h.normal[0], h.normal[1]);
  const std::size_t n = poly.vertices.size();
  auto push = [&](const Eigen::Vector2d& p) {
    if (out.vertices.empty() || (out.vertices.back() - p).norm() > kMergeTol) out.vertices.push_back(p);
  };
  // Slack within rounding of zero counts as on the line; otherwise an edge
  // lying along it "crosses" at an arbitrary point and grows a vertex.
  double reach = std::abs(h.offset);
  for (const auto& p : poly.vertices) reach = std::max(reach, std::abs(a.dot(p)));
  const double tol = 1e-12 * std::max(1.0, reach);
  auto side = [&](const Eigen::Vector2d& p) {
    const double s = h.offset - a.dot(p);
    return std::pair{s, s >= -tol ? (s > tol ? 1 : 0) : -1};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = poly.vertices[i];
    const Eigen::Vector2d& q = poly.vertices[(i + 1) % n];
    const auto [sp, cp] = side(p);
    const auto [sq, cq] = side(q);
    if (cp >= 0) push(p);
    if (cp * cq < 0) {
      const double t = sp / (sp - sq);
      push(p + t * (q - p));
    }
  }
  if (out.vertices.size() > 1 && (out.vertices.front() - out.vertices.back()).norm() <= kMergeTol) {
    out.vertices.pop_back();
  }
  if (out.vertices.size() < 3) out.vertices.clear();
  return out;
}

double polygon_area(const ConvexPolygon& poly) {
  if (poly.vertices.size() < 3) return 0.0;
  double twice = 0.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly.vertices[i];
    const auto& q = poly.vertices[(i + 1) % n];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return std::max(0.0, 0.5 * twice);
}

ExactAffinity exact_affinity_2d_detail(const Vector& x, double query_weight, std::span<const double> weights,
                                       const ClusterModel& model, const Box& box) {
  if (model.dim() != 2 || x.size() != 2) throw Error(ErrorCode::kDimensionMismatch, "exact oracle is two-dimensional");
  const auto measure = DistanceMeasure::squared_euclidean();
  const std::size_t k = model.k();
  ExactAffinity out;
  if (const auto site = coincident_site(x, model)) {
    out.affinity = indicator_affinity(k, *site);
    return out;
  }
  const InfluenceCell cell = build_influence_cell(x, query_weight, weights, model, measure, box);
  if (max_violation(cell, x) > kContainmentTol) {
    out.affinity = indicator_affinity(k, steal_owner(x, model, weights, measure));
    return out;
  }

  ConvexPolygon polygon = ConvexPolygon::from_box(box);
  for (const auto& face : cell.faces) {
    if (face.kind == FaceKind::kSite) polygon = clip_polygon(polygon, face.halfspace);
  }
  out.cell = polygon;
  const double cell_area = polygon_area(polygon);
  if (!(cell_area > 0.0)) throw Error(ErrorCode::kEmptyCell, "influence cell has zero area");

  std::vector<double> areas(k, 0.0);
  out.stolen.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    ConvexPolygon region = polygon;
    for (std::size_t j = 0; j < k && !region.empty(); ++j) {
      if (j == i) continue;
      region = clip_polygon(region, bisector_halfspace(model.representative(i), weights[i],
                                                       model.representative(j), weights[j], measure));
    }
    areas[i] = polygon_area(region);
    out.stolen[i] = std::move(region);
  }
  double total = 0.0;
  for (double a : areas) total += a;
  out.affinity.alphas.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.affinity.alphas[i] = areas[i] / total;
  const Stability s = classify_stability(out.affinity.alphas);
  out.affinity.stable = s.stable;
  out.affinity.score = s.score;
  out.affinity.stable_index = s.stable_index;
  const std::size_t n = polygon.vertices.size();
  for (std::size_t i = 0; i < n && !out.affinity.clipped; ++i) {
    out.affinity.clipped = on_box_edge(polygon.vertices[i], polygon.vertices[(i + 1) % n], box);
  }
  return out;
}

AffinityVector exact_affinity_2d(const Vector& x, const ClusterModel& model, const Box& box) {
  return exact_affinity_2d_detail(x, model.query_weight(), model.weights(), model, box).affinity;
}

AffinityVector grid_affinity(const Vector& x, const ClusterModel& model, const DistanceMeasure& measure,
                             std::size_t resolution, const Box& box) {
  const std::size_t d = model.dim();
  if (d > 4) throw Error(ErrorCode::kInvalidArgument, "grid oracle supports at most 4 dimensions");
  if (resolution < 16) throw Error(ErrorCode::kInvalidArgument, "grid resolution must be at least 16");
  if (static_cast<std::size_t>(x.size()) != d) throw Error(ErrorCode::kDimensionMismatch, "query dimension mismatch");
  measure.check_domain(x);
  const std::size_t k = model.k();
  if (const auto site = coincident_site(x, model)) return indicator_affinity(k, *site);
  InfluenceCell cell = build_influence_cell(x, model, measure, box);
  if (max_violation(cell, x) > kContainmentTol) {
    return indicator_affinity(k, steal_owner(x, model, measure));
  }

  const Vector step = (box.hi - box.lo) / static_cast<double>(resolution);
  const auto last = static_cast<Eigen::Index>(d - 1);
  // Symmetric layouts put nodes exactly on bisectors; a tie splits the node
  // evenly instead of handing it to the lowest index.
  std::vector<double> counts(k, 0.0);
  std::size_t total = 0;
  bool clipped = false;
  std::vector<double> score(k);
  auto tally = [&](const Vector& node) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      score[j] = measure.divergence(node, model.representative(j)) - model.weights()[j];
      best = std::min(best, score[j]);
    }
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    std::size_t tied = 0;
    for (std::size_t j = 0; j < k; ++j) tied += score[j] <= best + tol;
    for (std::size_t j = 0; j < k; ++j) {
      if (score[j] <= best + tol) counts[j] += 1.0 / static_cast<double>(tied);
    }
    ++total;
  };

  // Walk every line parallel to the last axis; the cell meets each line in
  // one interval, so only the nodes inside it are visited.
  std::size_t lines = 1;
  for (std::size_t a = 0; a + 1 < d; ++a) lines *= resolution;
  Vector y(static_cast<Eigen::Index>(d));
  Vector axis = Vector::Zero(static_cast<Eigen::Index>(d));
  axis[last] = 1.0;
  for (std::size_t line = 0; line < lines; ++line) {
    std::size_t rest = line;
    for (Eigen::Index a = 0; a < last; ++a) {
      const std::size_t idx = rest % resolution;
      rest /= resolution;
      y[a] = box.lo[a] + (static_cast<double>(idx) + 0.5) * step[a];
    }
    y[last] = box.lo[last];
    double t_lo = 0.0;
    double t_hi = box.hi[last] - box.lo[last];
    bool empty = false;
    for (const auto& face : cell.faces) {
      if (face.kind == FaceKind::kBox && face.halfspace.normal[last] != 0.0) continue;
      const double rate = face.halfspace.normal[last];
      const double slack = face.halfspace.slack(y);
      if (rate > 0.0) {
        t_hi = std::min(t_hi, slack / rate);
      } else if (rate < 0.0) {
        t_lo = std::max(t_lo, slack / rate);
      } else if (slack < 0.0) {
        empty = true;
        break;
      }
      if (t_lo > t_hi) {
        empty = true;
        break;
      }
    }
    if (empty) continue;
    auto first = static_cast<long long>(std::ceil(t_lo / step[last] - 0.5));
    auto final = static_cast<long long>(std::floor(t_hi / step[last] - 0.5));
    first = std::max(first, 0LL);
    final = std::min(final, static_cast<long long>(resolution) - 1);
    for (long long j = first; j <= final; ++j) {
      y[last] = box.lo[last] + (static_cast<double>(j) + 0.5) * step[last];
      if (!cell_contains(cell, y)) continue;
      tally(y);
      if (!clipped) {
        for (std::size_t a = 0; a < d && !clipped; ++a) {
          const auto ai = static_cast<Eigen::Index>(a);
          clipped = y[ai] - box.lo[ai] < step[ai] || box.hi[ai] - y[ai] < step[ai];
        }
      }
    }
  }
  if (total == 0) throw Error(ErrorCode::kEmptyCell, "no grid node falls inside the influence cell");
  AffinityVector out;
  out.alphas.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.alphas[j] = counts[j] / static_cast<double>(total);
  const Stability s = classify_stability(out.alphas);
  out.stable = s.stable;
  out.score = s.score;
  out.stable_index = s.stable_index;
  out.clipped = clipped;
  return out;
}

}  // namespace affinity
