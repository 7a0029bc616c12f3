#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "affinity/io.hpp"

namespace affinity {
namespace {

namespace fs = std::filesystem;

std::string parse_error(const std::string& text, std::optional<std::size_t> dim = std::nullopt) {
  std::istringstream in(text);
  try {
    read_points_csv(in, dim, "pts.csv");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(ReadPoints, ThreeByTwo) {
  std::istringstream in("1,2\n3.5,-4\n0,1e-3\n");
  const Dataset data = read_points_csv(in);
  EXPECT_EQ(data.size(), 3u);
  EXPECT_EQ(data.dim(), 2u);
  EXPECT_EQ(data[1][0], 3.5);
  EXPECT_EQ(data[2][1], 1e-3);
}

TEST(ReadPoints, HeaderAndBlankLinesSkipped) {
  std::istringstream in("x,y\n1,2\n\n3,4\n");
  const Dataset data = read_points_csv(in);
  EXPECT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0][0], 1.0);
}

TEST(ReadPoints, RaggedRowNamesLine) {
  const std::string msg = parse_error("1,2\n3,4\n5\n");
  EXPECT_NE(msg.find("pts.csv:3"), std::string::npos) << msg;
}

TEST(ReadPoints, NonFiniteRejected) {
  EXPECT_NE(parse_error("1,2\nnan,4\n").find(":2"), std::string::npos);
  EXPECT_NE(parse_error("1,inf\n").find(":1"), std::string::npos);
  EXPECT_NE(parse_error("1,2\n3,abc\n").find(":2"), std::string::npos);
}

TEST(ReadPoints, DimensionMismatch) {
  std::istringstream in("1,2,3\n");
  try {
    read_points_csv(in, 2, "pts.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
    EXPECT_NE(std::string(e.what()).find("pts.csv:1"), std::string::npos);
  }
}

TEST(ReadPoints, EmptyFileRejected) {
  EXPECT_FALSE(parse_error("").empty());
  EXPECT_FALSE(parse_error("x,y\n").empty());
}

TEST(Labels, ReadWriteRoundTrip) {
  const auto path = fs::temp_directory_path() / "affinity_io_labels.csv";
  write_labels(path, {0, 2, 1, 2});
  const Partition p = read_labels(path);
  EXPECT_EQ(p.labels(), (std::vector<int>{0, 2, 1, 2}));
  fs::remove(path);
  std::istringstream bad("0\n1.5\n");
  EXPECT_THROW(read_labels(bad), Error);
}

TEST(AffinityCsv, HeaderAndRoundTrip) {
  std::vector<PointResult> results(3);
  results[0].value = AffinityVector{{0.75, 0.25}, true, 1.0, 0, false};
  results[1].error = "outside domain";
  results[2].value = AffinityVector{{0.5, 0.5}, false, 0.5, std::nullopt, true};
  std::ostringstream out;
  write_affinity_csv(out, results, 2);
  EXPECT_EQ(out.str(), "id,score,stable,alpha_0,alpha_1,clipped\n0,1,1,0.75,0.25,0\n2,0.5,0,0.5,0.5,1\n");
  const auto path = fs::temp_directory_path() / "affinity_io_aff.csv";
  write_affinity_csv(path, results, 2);
  const auto rows = read_affinity_csv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].id, 2u);
  EXPECT_EQ(rows[1].alphas, (std::vector<double>{0.5, 0.5}));
  EXPECT_TRUE(rows[1].clipped);
  EXPECT_TRUE(rows[0].stable);
  fs::remove(path);
}

TEST(FormatReal, NineDigits) {
  EXPECT_EQ(format_real(1.0), "1");
  EXPECT_EQ(format_real(2.0 / 3.0), "0.666666667");
  EXPECT_EQ(format_real(1e-12), "1e-12");
}

}  // namespace
}  // namespace affinity
