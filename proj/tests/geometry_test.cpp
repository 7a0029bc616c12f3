#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "affinity/geometry.hpp"
#include "affinity/rng.hpp"

namespace affinity {
namespace {

Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

InfluenceCell unit_square_cell() {
  // Single competitor far away so only the box faces matter.
  const ClusterModel model({v2(100.0, 100.0)});
  return build_influence_cell(v2(0.5, 0.5), model, DistanceMeasure::squared_euclidean(),
                              Box{v2(0.0, 0.0), v2(1.0, 1.0)});
}

// Independent divergence evaluations used as oracles.
double kl(const Vector& p, const Vector& q) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]) - p[i] + q[i];
  return s;
}

TEST(Dataset, RejectsRaggedAndNonFinite) {
  EXPECT_THROW(Dataset({}), Error);
  EXPECT_THROW(Dataset({v2(0, 0), Eigen::Vector3d(0, 0, 0)}), Error);
  EXPECT_THROW(Dataset({v2(0, std::nan(""))}), Error);
  const Dataset d({v2(0, 0), v2(1, 2), v2(3, 4)});
  EXPECT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim(), 2u);
}

TEST(ClusterModel, RejectsDuplicateRepresentatives) {
  try {
    ClusterModel({v2(1, 1), v2(0, 0), v2(1, 1 + 1e-14)});
    FAIL() << "expected coincident-sites error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoincidentSites);
  }
  EXPECT_NO_THROW(ClusterModel({v2(1, 1), v2(1, 1 + 1e-6)}));
}

TEST(ClusterModel, RejectsBadWeightsAndLabels) {
  EXPECT_THROW(ClusterModel({v2(0, 0), v2(1, 0)}, {0.0}), Error);
  EXPECT_THROW(ClusterModel({v2(0, 0), v2(1, 0)}, {0.0, INFINITY}), Error);
  EXPECT_THROW(ClusterModel({v2(0, 0), v2(1, 0)}, {}, std::vector<int>{0, 2}), Error);
  EXPECT_THROW(ClusterModel({v2(0, 0), v2(1, 0)}, {}, std::nullopt, WeightRule::kClusterSize), Error);
}

TEST(ClusterModel, FromLabelsUsesCentroidsAndSizeWeights) {
  const Dataset data({v2(0, 0), v2(2, 0), v2(10, 10), v2(10, 12), v2(10, 14)});
  const auto model = ClusterModel::from_labels(data, {0, 0, 1, 1, 1}, WeightRule::kClusterSize);
  ASSERT_EQ(model.k(), 2u);
  EXPECT_DOUBLE_EQ(model.representative(0)[0], 1.0);
  EXPECT_DOUBLE_EQ(model.representative(1)[1], 12.0);
  EXPECT_DOUBLE_EQ(model.weights()[0], 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(model.weights()[1], 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(model.query_weight(), 1.0 / 5.0);
  EXPECT_THROW(ClusterModel::from_labels(data, {0, 0, 2, 2, 2}), Error);  // cluster 1 empty
}

TEST(Bisector, MidpointBisector) {
  const auto h = bisector_halfspace(v2(0, 0), 0.0, v2(2, 0), 0.0, DistanceMeasure::squared_euclidean());
  EXPECT_DOUBLE_EQ(h.normal[0], 4.0);
  EXPECT_DOUBLE_EQ(h.normal[1], 0.0);
  EXPECT_DOUBLE_EQ(h.offset, 4.0);
}

TEST(Bisector, PowerBisectorBoundaryEqualizesPowerDistance) {
  const auto h = bisector_halfspace(v2(0, 0), 1.0, v2(2, 0), 0.0, DistanceMeasure::squared_euclidean());
  EXPECT_DOUBLE_EQ(h.offset / h.normal[0], 1.25);
  for (double t : {-3.0, 0.0, 2.5}) {
    const Vector y = v2(1.25, t);
    EXPECT_NEAR(y.squaredNorm() - 1.0, (y - v2(2, 0)).squaredNorm() - 0.0, 1e-12);
  }
}

TEST(Bisector, GeneralizedKLIsLinear) {
  const auto measure = DistanceMeasure::bregman(Generator::kGeneralizedKL);
  const double e = std::numbers::e;
  const auto h = bisector_halfspace(v2(1, 1), 0.0, v2(e, e), 0.0, measure);
  EXPECT_NEAR(h.normal[0], 1.0, 1e-12);
  EXPECT_NEAR(h.normal[1], 1.0, 1e-12);
  EXPECT_NEAR(h.offset, 2 * e - 2, 1e-12);
  EXPECT_NEAR(h.offset, 3.4366, 1e-4);
  // Points on the plane are equidistant from both sites.
  for (double y1 : {0.5, 1.7, 3.0}) {
    const Vector y = v2(y1, 2 * e - 2 - y1);
    EXPECT_NEAR(kl(y, v2(1, 1)), kl(y, v2(e, e)), 1e-12);
  }
}

TEST(Bisector, BregmanMatchesDivergenceComparisonEverywhere) {
  Philox rng(3);
  for (Generator g : {Generator::kSquaredNorm, Generator::kGeneralizedKL, Generator::kItakuraSaito}) {
    const auto measure = DistanceMeasure::bregman(g);
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = v2(rng.uniform(0.1, 3), rng.uniform(0.1, 3));
      const Vector c = v2(rng.uniform(0.1, 3), rng.uniform(0.1, 3));
      const double wx = rng.uniform(-0.5, 0.5), wc = rng.uniform(-0.5, 0.5);
      const auto h = bisector_halfspace(x, wx, c, wc, measure);
      const Vector y = v2(rng.uniform(0.1, 3), rng.uniform(0.1, 3));
      const double lhs = measure.divergence(y, x) - wx;
      const double rhs = measure.divergence(y, c) - wc;
      if (std::abs(lhs - rhs) < 1e-9) continue;
      EXPECT_EQ(h.slack(y) >= 0.0, lhs <= rhs);
    }
  }
}

TEST(Bisector, Errors) {
  const auto euclid = DistanceMeasure::squared_euclidean();
  try {
    bisector_halfspace(v2(1, 1), 0, v2(1, 1), 0, euclid);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoincidentSites);
  }
  try {
    bisector_halfspace(v2(1, -1), 0, v2(1, 1), 0, DistanceMeasure::bregman(Generator::kGeneralizedKL));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomain);
  }
}

TEST(Bisector, MidpointAndNormalProperty) {
  Philox rng(9);
  for (int t = 0; t < 100; ++t) {
    const Vector x = Vector::NullaryExpr(4, [&] { return rng.uniform(-5, 5); });
    const Vector c = Vector::NullaryExpr(4, [&] { return rng.uniform(-5, 5); });
    const auto h = bisector_halfspace(x, 0, c, 0, DistanceMeasure::squared_euclidean());
    EXPECT_NEAR(h.slack(0.5 * (x + c)), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(h.normal.normalized().dot((c - x).normalized())), 1.0, 1e-12);
  }
}

TEST(Bisector, CommonWeightShiftIsBitIdentical) {
  const auto euclid = DistanceMeasure::squared_euclidean();
  const Vector x = v2(0.3, -1.7), c = v2(2.9, 0.4);
  const auto h0 = bisector_halfspace(x, 0.25, c, 0.5, euclid);
  const auto h1 = bisector_halfspace(x, 0.25 + 8.0, c, 0.5 + 8.0, euclid);
  EXPECT_EQ(h0.offset, h1.offset);
  EXPECT_EQ(h0.normal, h1.normal);
}

TEST(InfluenceCell, SingleCompetitor) {
  const ClusterModel model({v2(5, 0)});
  const auto cell = build_influence_cell(v2(0, 0), model, DistanceMeasure::squared_euclidean(),
                                         Box{v2(-10, -10), v2(10, 10)});
  std::size_t sites = 0, box = 0;
  for (const auto& f : cell.faces) {
    sites += f.kind == FaceKind::kSite;
    box += f.kind == FaceKind::kBox;
  }
  EXPECT_EQ(sites, 1u);
  EXPECT_EQ(box, 4u);
  EXPECT_TRUE(cell_contains(cell, v2(2.4, 9)));
  EXPECT_FALSE(cell_contains(cell, v2(2.6, 0)));
}

TEST(InfluenceCell, TwoCentersOnALine) {
  const ClusterModel model({v2(0, 0), v2(10, 0)});
  const auto cell = build_influence_cell(v2(2, 0), model, DistanceMeasure::squared_euclidean(),
                                         Box{v2(-20, -20), v2(20, 20)});
  EXPECT_TRUE(cell_contains(cell, v2(1.0, 15)));
  EXPECT_TRUE(cell_contains(cell, v2(6.0, -15)));
  EXPECT_FALSE(cell_contains(cell, v2(0.99, 0)));
  EXPECT_FALSE(cell_contains(cell, v2(6.01, 0)));
  const auto chord = chord_intersect(cell, v2(2, 0), v2(1, 0));
  EXPECT_NEAR(chord.t_min, -1.0, 1e-12);
  EXPECT_NEAR(chord.t_max, 4.0, 1e-12);
}

TEST(InfluenceCell, Errors) {
  const ClusterModel model({v2(0, 0), v2(10, 0)});
  const Box box{v2(-20, -20), v2(20, 20)};
  const auto euclid = DistanceMeasure::squared_euclidean();
  try {
    build_influence_cell(v2(0, 0), model, euclid, box);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCoincidentSites);
  }
  try {
    build_influence_cell(v2(30, 0), model, euclid, box);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoxExcludesPoint);
  }
}

TEST(InfluenceCell, DomainFacesForPositiveGenerators) {
  const ClusterModel model({v2(1, 2), v2(3, 1)});
  const auto cell = build_influence_cell(v2(2, 2), model, DistanceMeasure::bregman(Generator::kItakuraSaito),
                                         Box{v2(-1, -1), v2(5, 5)});
  std::size_t domain = 0;
  for (const auto& f : cell.faces) domain += f.kind == FaceKind::kDomain;
  EXPECT_EQ(domain, 2u);
  EXPECT_FALSE(cell_contains(cell, v2(-0.5, 2)));
}

TEST(CellContains, UnitSquare) {
  const auto cell = unit_square_cell();
  EXPECT_TRUE(cell_contains(cell, v2(0.5, 0.5)));
  EXPECT_FALSE(cell_contains(cell, v2(1.5, 0.5)));
  EXPECT_TRUE(cell_contains(cell, v2(1.0, 0.5)));
  EXPECT_TRUE(cell_contains(cell, v2(1.0 + 5e-10, 0.5)));
  EXPECT_FALSE(cell_contains(cell, v2(1.0 + 5e-9, 0.5)));
}

TEST(ChordIntersect, UnitSquare) {
  const auto cell = unit_square_cell();
  auto c = chord_intersect(cell, v2(0.5, 0.5), v2(1, 0));
  EXPECT_NEAR(c.t_min, -0.5, 1e-15);
  EXPECT_NEAR(c.t_max, 0.5, 1e-15);
  c = chord_intersect(cell, v2(0.5, 0.5), v2(1, 1).normalized());
  EXPECT_NEAR(c.t_min, -std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(c.t_max, std::sqrt(0.5), 1e-12);
  EXPECT_EQ(cell.faces[c.upper_face].kind, FaceKind::kBox);
}

TEST(ChordIntersect, OriginOutsideCell) {
  const ClusterModel model({v2(2, 0)});
  const auto cell = build_influence_cell(v2(0, 0), model, DistanceMeasure::squared_euclidean(),
                                         Box{v2(-5, -5), v2(5, 5)});
  try {
    chord_intersect(cell, v2(2, 0), v2(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutsideCell);
  }
}

TEST(ChordIntersect, EndpointsTouchTheBoundary) {
  Philox rng(17);
  const ClusterModel model({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(4, 1, 0), Eigen::Vector3d(1, 4, 2),
                            Eigen::Vector3d(-3, 2, -1)});
  const Box box{Eigen::Vector3d(-8, -8, -8), Eigen::Vector3d(8, 8, 8)};
  const auto cell = build_influence_cell(Eigen::Vector3d(0.8, 1.2, 0.3), model, DistanceMeasure::squared_euclidean(), box);
  for (int t = 0; t < 200; ++t) {
    const Vector u = Vector::NullaryExpr(3, [&] { return rng.normal(); }).normalized();
    const auto c = chord_intersect(cell, cell.interior_point, u);
    ASSERT_LT(c.t_min, 0.0);
    ASSERT_GT(c.t_max, 0.0);
    for (double t_end : {c.t_min, c.t_max}) {
      const Vector p = cell.interior_point + t_end * u;
      EXPECT_LE(max_violation(cell, p), 1e-9);
      EXPECT_GE(max_violation(cell, p), -1e-9);  // some face is tight
    }
  }
}

TEST(StealOwner, NearestAndTies) {
  const ClusterModel model({v2(0, 0), v2(10, 0), v2(0, 10)});
  const auto euclid = DistanceMeasure::squared_euclidean();
  EXPECT_EQ(steal_owner(v2(1, 2), model, euclid), 0u);
  EXPECT_EQ(steal_owner(v2(5, 0), model, euclid), 0u);
  EXPECT_EQ(steal_owner(v2(9, 1), model, euclid), 1u);
}

TEST(StealOwner, PowerDistance) {
  const ClusterModel model({v2(0, 0), v2(4, 0)}, {0.0, 12.0});
  EXPECT_EQ(steal_owner(v2(1, 0), model, DistanceMeasure::squared_euclidean()), 1u);
}

TEST(StealOwner, DomainError) {
  const ClusterModel model({v2(1, 1), v2(2, 2)});
  EXPECT_THROW(steal_owner(v2(0, 1), model, DistanceMeasure::bregman(Generator::kGeneralizedKL)), Error);
}

TEST(StealOwner, InvariantUnderCommonWeightShift) {
  Philox rng(5);
  std::vector<Vector> reps;
  std::vector<double> w;
  for (int i = 0; i < 6; ++i) {
    reps.push_back(v2(rng.uniform(-3, 3), rng.uniform(-3, 3)));
    w.push_back(std::ldexp(std::floor(rng.uniform(0, 64)), -4));  // exact in binary
  }
  const ClusterModel model(reps, w);
  const ClusterModel shifted = model.shifted(16.0);
  for (int t = 0; t < 500; ++t) {
    const Vector y = v2(rng.uniform(-4, 4), rng.uniform(-4, 4));
    EXPECT_EQ(steal_owner(y, model, DistanceMeasure::squared_euclidean()),
              steal_owner(y, shifted, DistanceMeasure::squared_euclidean()));
  }
}

TEST(InfluenceCell, QueryInsideOwnCellAndConsistentWithStealSemantics) {
  Philox rng(23);
  for (Generator g : {Generator::kSquaredNorm, Generator::kGeneralizedKL, Generator::kItakuraSaito}) {
    const auto measure = DistanceMeasure::bregman(g);
    std::vector<Vector> reps;
    for (int i = 0; i < 5; ++i) reps.push_back(v2(rng.uniform(0.5, 4), rng.uniform(0.5, 4)));
    const ClusterModel model(reps);
    const Box box{v2(-1, -1), v2(6, 6)};
    for (int t = 0; t < 20; ++t) {
      const Vector x = v2(rng.uniform(0.5, 4), rng.uniform(0.5, 4));
      const auto cell = build_influence_cell(x, model, measure, box);
      EXPECT_TRUE(cell_contains(cell, x));
      for (int s = 0; s < 50; ++s) {
        const Vector y = v2(rng.uniform(0.01, 5), rng.uniform(0.01, 5));
        if (!cell_contains(cell, y)) continue;
        for (std::size_t j = 0; j < model.k(); ++j) {
          EXPECT_LE(measure.divergence(y, x), measure.divergence(y, model.representative(j)) + 1e-9);
        }
      }
    }
  }
}

TEST(Box, AroundInflatesAboutCenter) {
  const std::vector<Vector> pts{v2(0, 0), v2(2, 4)};
  const Box b = Box::around(pts, 2.0);
  EXPECT_DOUBLE_EQ(b.lo[0], -1.0);
  EXPECT_DOUBLE_EQ(b.hi[0], 3.0);
  EXPECT_DOUBLE_EQ(b.lo[1], -2.0);
  EXPECT_DOUBLE_EQ(b.hi[1], 6.0);
  const Box flat = Box::around(std::vector<Vector>{v2(0, 3), v2(2, 3)}, 2.0);
  EXPECT_GT(flat.hi[1], flat.lo[1]);
}

}  // namespace
}  // namespace affinity
