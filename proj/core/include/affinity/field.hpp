#pragma once

// The affinity score as a scalar field over the plane: evaluation on a grid,
// greyscale heatmaps, and marching-squares contours.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "affinity/engine.hpp"
#include "affinity/geometry.hpp"

namespace affinity {

struct GridSpec {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  std::size_t nx = 2, ny = 2;

  void validate() const;
};

// nx x ny node values, row-major with row j at y = origin.y + j * dy.
struct ScalarFieldGrid {
  Eigen::Vector2d origin{0.0, 0.0};
  double dx = 1.0;
  double dy = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> scores;

  double at(std::size_t i, std::size_t j) const { return scores[j * nx + i]; }
  double& at(std::size_t i, std::size_t j) { return scores[j * nx + i]; }
  Eigen::Vector2d node(std::size_t i, std::size_t j) const {
    return {origin.x() + static_cast<double>(i) * dx, origin.y() + static_cast<double>(j) * dy};
  }

  static ScalarFieldGrid from_spec(const GridSpec& spec);
};

struct FieldOptions {
  unsigned threads = 0;
  std::optional<Box> box;  // defaults to the representatives and grid extent, inflated
  double box_inflation = 2.0;
};

// Score of every node treated as a query point, node (i, j) seeded with
// mix_seed(config.seed, j * nx + i). Throws on the first failing node,
// naming it.
ScalarFieldGrid evaluate_affinity_field(const ClusterModel& model, const DistanceMeasure& measure,
                                        const SamplerConfig& config, const GridSpec& spec,
                                        const FieldOptions& options = {});

// round(255 * (1 - score)) per pixel.
unsigned char heatmap_pixel(double score);

// Binary P5, maxval 255, top row is the largest y.
void write_heatmap_pgm(const ScalarFieldGrid& grid, const std::filesystem::path& path);

struct Pgm {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<unsigned char> pixels;  // row-major, top row first
};

Pgm read_pgm(const std::filesystem::path& path);

struct Segment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct ContourLevel {
  double level = 0.0;
  std::vector<Segment> segments;
};

inline const std::vector<double> kDefaultContourLevels{0.5, 0.6, 0.7, 0.8, 0.9};

// Marching squares with linear interpolation along cell edges. Saddle cells
// are resolved by comparing the mean of the four corners with the level.
// Throws kInvalidArgument unless levels are strictly increasing in (0, 1).
std::vector<ContourLevel> extract_contours(const ScalarFieldGrid& grid, const std::vector<double>& levels);

// Joins segments that share endpoints (within `tol`) into polylines.
// Closed loops repeat their first vertex at the end.
std::vector<std::vector<Eigen::Vector2d>> chain_segments(const std::vector<Segment>& segments, double tol = 1e-9);

// SVG 1.1 with one <g> per level.
void write_contours_svg(const ScalarFieldGrid& grid, const std::vector<ContourLevel>& contours,
                        const std::filesystem::path& path);

// CSV "x,y,score", 9 significant digits.
void write_field_csv(const ScalarFieldGrid& grid, const std::filesystem::path& path);

}  // namespace affinity
