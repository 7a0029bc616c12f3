#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "affinity/exact.hpp"
#include "affinity/rng.hpp"

namespace affinity {
namespace {

Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

ConvexPolygon unit_square() { return ConvexPolygon::from_box(Box{v2(0, 0), v2(1, 1)}); }

HalfSpace halfplane(double a, double b, double offset) { return HalfSpace{v2(a, b), offset}; }

TEST(ClipPolygon, Examples) {
  EXPECT_DOUBLE_EQ(polygon_area(clip_polygon(unit_square(), halfplane(1, 0, 0.5))), 0.5);
  const auto same = clip_polygon(unit_square(), halfplane(1, 1, 5));
  ASSERT_EQ(same.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(polygon_area(same), 1.0);
  EXPECT_TRUE(clip_polygon(unit_square(), halfplane(1, 0, -1)).empty());
}

TEST(ClipPolygon, AreaNonIncreasingAndIdempotent) {
  Philox rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    ConvexPolygon poly = ConvexPolygon::from_box(Box{v2(-2, -2), v2(2, 2)});
    for (int cut = 0; cut < 5; ++cut) {
      const double angle = rng.uniform(0.0, 2.0 * M_PI);
      const HalfSpace h = halfplane(std::cos(angle), std::sin(angle), rng.uniform(-1.0, 2.0));
      const double before = polygon_area(poly);
      poly = clip_polygon(poly, h);
      EXPECT_LE(polygon_area(poly), before + 1e-12);
      const auto again = clip_polygon(poly, h);
      EXPECT_NEAR(polygon_area(again), polygon_area(poly), 1e-12);
      EXPECT_EQ(again.vertices.size(), poly.vertices.size());
    }
    // Counter-clockwise and convex.
    const auto& p = poly.vertices;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Eigen::Vector2d e1 = p[(i + 1) % p.size()] - p[i];
      const Eigen::Vector2d e2 = p[(i + 2) % p.size()] - p[(i + 1) % p.size()];
      EXPECT_GE(e1.x() * e2.y() - e1.y() * e2.x(), -1e-9);
    }
  }
}

TEST(PolygonArea, Examples) {
  EXPECT_DOUBLE_EQ(polygon_area(unit_square()), 1.0);
  EXPECT_DOUBLE_EQ(polygon_area(ConvexPolygon{{{0, 0}, {1, 0}, {0, 1}}}), 0.5);
  EXPECT_DOUBLE_EQ(polygon_area(ConvexPolygon{{{0, 0}, {1, 1}, {2, 2}}}), 0.0);
  EXPECT_DOUBLE_EQ(polygon_area(ConvexPolygon{}), 0.0);
}

TEST(ExactAffinity, FourFoldSymmetry) {
  const ClusterModel model({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)});
  const auto a = exact_affinity_2d(v2(0, 0), model, Box{v2(-5, -5), v2(5, 5)});
  for (double alpha : a.alphas) EXPECT_NEAR(alpha, 0.25, 1e-12);
  EXPECT_FALSE(a.stable);
  EXPECT_FALSE(a.clipped);
}

TEST(ExactAffinity, LineCaseAnyHeight) {
  const ClusterModel model({v2(0, 0), v2(10, 0)});
  for (double h : {1.0, 7.5, 100.0}) {
    const auto a = exact_affinity_2d(v2(2, 0), model, Box{v2(-20, -h), v2(20, h)});
    EXPECT_NEAR(a.alphas[0], 0.8, 1e-12);
    EXPECT_NEAR(a.alphas[1], 0.2, 1e-12);
    EXPECT_TRUE(a.clipped);
  }
}

TEST(ExactAffinity, CoincidentIsIndicator) {
  const ClusterModel model({v2(0, 0), v2(10, 0), v2(3, 3)});
  const auto a = exact_affinity_2d(v2(3, 3), model, Box{v2(-20, -20), v2(20, 20)});
  EXPECT_EQ(a.alphas, (std::vector<double>{0, 0, 1}));
}

TEST(ExactAffinity, Errors) {
  const ClusterModel model({v2(0, 0), v2(10, 0)});
  EXPECT_THROW(exact_affinity_2d(v2(50, 0), model, Box{v2(-20, -20), v2(20, 20)}), Error);
  const ClusterModel three({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)});
  EXPECT_THROW(exact_affinity_2d(Eigen::Vector3d(0.2, 0, 0), three, Box{Vector::Constant(3, -2), Vector::Constant(3, 2)}),
               Error);
}

// Independent brute force: midpoint rule over a fine lattice, each lattice
// point tested directly against every weighted distance.
std::vector<double> brute_force(const Vector& x, double wx, const std::vector<Vector>& reps,
                                const std::vector<double>& w, const Box& box, int n) {
  std::vector<double> counts(reps.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Vector y = v2(box.lo[0] + (i + 0.5) * (box.hi[0] - box.lo[0]) / n,
                          box.lo[1] + (j + 0.5) * (box.hi[1] - box.lo[1]) / n);
      const double dx = (y - x).squaredNorm() - wx;
      std::size_t best = 0;
      double best_d = 0.0;
      bool inside = true;
      for (std::size_t c = 0; c < reps.size(); ++c) {
        const double dc = (y - reps[c]).squaredNorm() - w[c];
        if (dc < dx) inside = false;
        if (c == 0 || dc < best_d) {
          best = c;
          best_d = dc;
        }
      }
      if (inside) counts[best] += 1.0;
    }
  }
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  for (double& c : counts) c /= total;
  return counts;
}

TEST(ExactAffinity, MatchesBruteForceOnRandomConfigurations) {
  Philox rng(12);
  const Box box{v2(-6, -6), v2(6, 6)};
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<Vector> reps;
    std::vector<double> w;
    for (int c = 0; c < 5; ++c) {
      reps.push_back(v2(rng.uniform(-3, 3), rng.uniform(-3, 3)));
      w.push_back(trial % 2 ? rng.uniform(0, 1) : 0.0);
    }
    const Vector x = v2(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double wx = trial % 2 ? 0.3 : 0.0;
    const ClusterModel model(reps, w, std::nullopt, WeightRule::kExplicit, wx);
    // A query outside its own power cell gets the indicator rule instead.
    bool dominated = false;
    for (std::size_t c = 0; c < reps.size(); ++c) dominated |= (x - reps[c]).squaredNorm() - w[c] < -wx;
    if (dominated) continue;
    const auto exact = exact_affinity_2d(x, model, box);
    const auto bf = brute_force(x, wx, reps, w, box, 1200);
    for (std::size_t c = 0; c < reps.size(); ++c) EXPECT_NEAR(exact.alphas[c], bf[c], 0.01) << "trial " << trial;
  }
}

TEST(ExactAffinity, StolenAreasSumToCellArea) {
  Philox rng(13);
  const Box box{v2(-6, -6), v2(6, 6)};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vector> reps;
    for (int c = 0; c < 6; ++c) reps.push_back(v2(rng.uniform(-4, 4), rng.uniform(-4, 4)));
    const ClusterModel model(reps);
    const Vector x = v2(rng.uniform(-3, 3), rng.uniform(-3, 3));
    const std::vector<double> w(6, 0.0);
    const auto detail = exact_affinity_2d_detail(x, 0.0, w, model, box);
    double sum = 0.0;
    for (const auto& s : detail.stolen) sum += polygon_area(s);
    const double cell = polygon_area(detail.cell);
    EXPECT_NEAR(sum, cell, 1e-6 * cell);
  }
}

TEST(ExactAffinity, InvariantUnderSimilaritiesAndWeightShift) {
  const std::vector<Vector> reps{v2(0, 0), v2(4, 1), v2(1, 5), v2(-3, 2), v2(2, -3)};
  const std::vector<double> w{0.5, 0.0, 1.0, 0.25, 0.75};
  const double wx = 0.125;
  const Vector x = v2(0.7, 1.1);
  const Box box{v2(-60, -60), v2(60, 60)};
  const auto base = exact_affinity_2d(x, ClusterModel(reps, w, std::nullopt, WeightRule::kExplicit, wx), box);
  ASSERT_FALSE(base.clipped);

  Eigen::Matrix2d rot;
  rot << std::cos(1.1), -std::sin(1.1), std::sin(1.1), std::cos(1.1);
  const double s = 2.5;
  const Vector shift = v2(-7, 3);
  std::vector<Vector> moved;
  std::vector<double> ws;
  for (const auto& c : reps) moved.push_back(s * (rot * c) + shift);
  for (double v : w) ws.push_back(s * s * v);
  const auto similar = exact_affinity_2d(
      s * (rot * x) + shift, ClusterModel(moved, ws, std::nullopt, WeightRule::kExplicit, s * s * wx), Box{v2(-400, -400), v2(400, 400)});

  std::vector<double> shifted = w;
  for (double& v : shifted) v += 3.0;
  const auto lifted = exact_affinity_2d(x, ClusterModel(reps, shifted, std::nullopt, WeightRule::kExplicit, wx + 3.0), box);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    EXPECT_NEAR(similar.alphas[i], base.alphas[i], 1e-9);
    EXPECT_NEAR(lifted.alphas[i], base.alphas[i], 1e-9);
  }
}

TEST(GridAffinity, ReproducesPlanarCases) {
  const auto euclid = DistanceMeasure::squared_euclidean();
  for (std::size_t res : {16u, 64u, 256u}) {
    const double tol = 1.0 / static_cast<double>(res);
    const auto cross = grid_affinity(v2(0, 0), ClusterModel({v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)}), euclid, res,
                                     Box{v2(-4, -4), v2(4, 4)});
    for (double a : cross.alphas) EXPECT_NEAR(a, 0.25, tol);
    const auto line = grid_affinity(v2(2, 0), ClusterModel({v2(0, 0), v2(10, 0)}), euclid, res, Box{v2(0, -4), v2(8, 4)});
    EXPECT_NEAR(line.alphas[0], 0.8, tol);
    EXPECT_NEAR(line.alphas[1], 0.2, tol);
  }
}

TEST(GridAffinity, ConvergesToExact) {
  const std::vector<Vector> reps{v2(0, 0), v2(4, 1), v2(1, 5), v2(-3, 2), v2(2, -3)};
  const ClusterModel model(reps);
  const Box box{v2(-8, -8), v2(8, 8)};
  for (const Vector& x : {v2(0.7, 1.1), v2(1.5, -0.5), v2(-1.0, 1.8)}) {
    const auto exact = exact_affinity_2d(x, model, box);
    auto error = [&](std::size_t res) {
      const auto g = grid_affinity(x, model, DistanceMeasure::squared_euclidean(), res, box);
      double e = 0.0;
      for (std::size_t i = 0; i < reps.size(); ++i) e = std::max(e, std::abs(g.alphas[i] - exact.alphas[i]));
      return e;
    };
    const double coarse = error(32);
    const double fine = error(128);
    const double finest = error(512);
    EXPECT_LE(fine, coarse / 2.0 + 1e-12);
    EXPECT_LE(finest, fine / 2.0 + 1e-12);
    EXPECT_LE(finest, 1.0 / 512.0);
  }
}

TEST(GridAffinity, TetrahedronSymmetry) {
  const std::vector<Vector> reps{Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, -1, -1), Eigen::Vector3d(-1, 1, -1),
                                 Eigen::Vector3d(-1, -1, 1)};
  const std::size_t res = 64;
  const auto a = grid_affinity(Vector::Zero(3), ClusterModel(reps), DistanceMeasure::squared_euclidean(), res,
                               Box{Vector::Constant(3, -3), Vector::Constant(3, 3)});
  for (double alpha : a.alphas) EXPECT_NEAR(alpha, 0.25, 1.0 / res);
}

TEST(GridAffinity, Deterministic) {
  const ClusterModel model({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(2, 1, 0), Eigen::Vector3d(0, 2, 1)});
  const Box box{Vector::Constant(3, -4), Vector::Constant(3, 4)};
  const Vector x = Eigen::Vector3d(0.6, 0.7, 0.2);
  const auto a = grid_affinity(x, model, DistanceMeasure::squared_euclidean(), 48, box);
  const auto b = grid_affinity(x, model, DistanceMeasure::squared_euclidean(), 48, box);
  EXPECT_EQ(a.alphas, b.alphas);
}

TEST(GridAffinity, Guards) {
  const auto euclid = DistanceMeasure::squared_euclidean();
  const ClusterModel model({v2(0, 0), v2(10, 0)});
  EXPECT_THROW(grid_affinity(v2(2, 0), model, euclid, 8, Box{v2(-20, -20), v2(20, 20)}), Error);
  const ClusterModel five({Vector::Zero(5), Vector::Ones(5)});
  EXPECT_THROW(grid_affinity(Vector::Constant(5, 0.2), five, euclid, 16, Box{Vector::Constant(5, -2), Vector::Constant(5, 2)}),
               Error);
  // The query lies in the box but its cell is thinner than one grid step.
  EXPECT_THROW(grid_affinity(v2(5.0 - 1e-6, 0), ClusterModel({v2(0, 0), v2(10, 0)}, {0.0, 0.0}, std::nullopt,
                                                                WeightRule::kExplicit, -24.99),
                             euclid, 16, Box{v2(-20, -20), v2(20, 20)}),
               Error);
}

}  // namespace
}  // namespace affinity
