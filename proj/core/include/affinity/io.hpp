#pragma once

// CSV ingestion for point sets, label files and affinity tables.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "affinity/apps.hpp"
#include "affinity/engine.hpp"
#include "affinity/geometry.hpp"

namespace affinity {

// Comma-separated reals, one point per row. A first row that does not parse
// as numbers is treated as a header. Blank lines are skipped.
// Errors (kParse / kDimensionMismatch) name the offending line.
Dataset read_points_csv(std::istream& in, std::optional<std::size_t> expected_dim = std::nullopt,
                        const std::string& source = "<stream>");
Dataset read_points_csv(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = std::nullopt);

// One integer label per row, optional non-numeric header.
Partition read_labels(std::istream& in, const std::string& source = "<stream>");
Partition read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

// One real weight per row.
std::vector<double> read_weights(const std::filesystem::path& path);

void write_points_csv(const std::filesystem::path& path, const std::vector<Vector>& points);

// Affinity table: header id,score,stable,alpha_0..alpha_{k-1},clipped.
// Failed rows are omitted.
void write_affinity_csv(std::ostream& out, const std::vector<PointResult>& results, std::size_t k);
void write_affinity_csv(const std::filesystem::path& path, const std::vector<PointResult>& results, std::size_t k);

struct AffinityRow {
  std::size_t id = 0;
  double score = 0.0;
  bool stable = false;
  std::vector<double> alphas;
  bool clipped = false;
};

std::vector<AffinityRow> read_affinity_csv(const std::filesystem::path& path);

// "metric,value" rows.
void write_report_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& rows);

// %.9g formatting shared by every CSV writer.
std::string format_real(double v);

}  // namespace affinity
