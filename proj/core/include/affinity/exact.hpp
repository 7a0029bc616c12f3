#pragma once

// Ground-truth affinities: exact polygon areas in the plane and a
// deterministic grid count in low dimensions.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "affinity/engine.hpp"
#include "affinity/geometry.hpp"

namespace affinity {

// Counter-clockwise vertex list; empty means the empty set.
struct ConvexPolygon {
  std::vector<Eigen::Vector2d> vertices;

  static ConvexPolygon from_box(const Box& box);
  bool empty() const { return vertices.size() < 3; }
};

// poly ∩ h. Vertices that land within 1e-12 of each other are merged.
ConvexPolygon clip_polygon(const ConvexPolygon& poly, const HalfSpace& h);

// Shoelace area, 0 for empty or degenerate input.
double polygon_area(const ConvexPolygon& poly);

struct ExactAffinity {
  AffinityVector affinity;
  ConvexPolygon cell;                   // influence cell of the query inside the box
  std::vector<ConvexPolygon> stolen;    // per-cluster stolen regions
};

// Exact 2D affinity under squared Euclidean (power) comparison.
//
// Errors: kDimensionMismatch unless d = 2, kBoxExcludesPoint, kEmptyCell when
// the cell has zero area although the query is inside it.
ExactAffinity exact_affinity_2d_detail(const Vector& x, double query_weight, std::span<const double> weights,
                                       const ClusterModel& model, const Box& box);

AffinityVector exact_affinity_2d(const Vector& x, const ClusterModel& model, const Box& box);

// Counts grid-cell centres (resolution per axis over `box`) inside the query
// cell and attributes each to its steal owner.
//
// Errors: kInvalidArgument when d > 4 or resolution < 16, kEmptyCell when no
// grid centre falls inside the cell.
AffinityVector grid_affinity(const Vector& x, const ClusterModel& model, const DistanceMeasure& measure,
                             std::size_t resolution, const Box& box);

}  // namespace affinity
