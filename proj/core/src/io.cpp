#include "affinity/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace affinity {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_int(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail(ErrorCode code, const std::string& source, std::size_t line, const std::string& what) {
  throw Error(code, source + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Dataset read_points_csv(std::istream& in, std::optional<std::size_t> expected_dim, const std::string& source) {
  std::vector<Vector> points;
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = expected_dim.value_or(0);
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) numeric = parse_real(fields[i], values[i]);
    if (!numeric) {
      if (first_content) {
        first_content = false;
        continue;  // header
      }
      fail(ErrorCode::kParse, source, lineno, "non-numeric field");
    }
    first_content = false;
    for (double v : values) {
      if (!std::isfinite(v)) fail(ErrorCode::kParse, source, lineno, "non-finite value");
    }
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      fail(expected_dim && points.empty() ? ErrorCode::kDimensionMismatch : ErrorCode::kParse, source, lineno,
           "expected " + std::to_string(dim) + " fields, found " + std::to_string(values.size()));
    }
    points.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  if (points.empty()) throw Error(ErrorCode::kParse, source + ": no data rows");
  return Dataset(std::move(points));
}

Dataset read_points_csv(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  auto in = open_in(path);
  return read_points_csv(in, expected_dim, path.string());
}

Partition read_labels(std::istream& in, const std::string& source) {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    long long v = 0;
    if (!parse_int(t, v)) {
      if (first_content) {
        first_content = false;
        continue;
      }
      fail(ErrorCode::kParse, source, lineno, "expected one integer label");
    }
    first_content = false;
    if (v < 0 || v > 1'000'000'000) fail(ErrorCode::kParse, source, lineno, "label out of range");
    labels.push_back(static_cast<int>(v));
  }
  if (labels.empty()) throw Error(ErrorCode::kParse, source + ": no labels");
  return Partition(std::move(labels));
}

Partition read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_labels(in, path.string());
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
}

std::vector<double> read_weights(const std::filesystem::path& path) {
  const Dataset d = read_points_csv(path, 1);
  std::vector<double> w;
  w.reserve(d.size());
  for (const auto& p : d.points()) w.push_back(p[0]);
  return w;
}

void write_points_csv(const std::filesystem::path& path, const std::vector<Vector>& points) {
  auto out = open_out(path);
  for (const auto& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) out << (i ? "," : "") << format_real(p[i]);
    out << '\n';
  }
}

void write_affinity_csv(std::ostream& out, const std::vector<PointResult>& results, std::size_t k) {
  out << "id,score,stable";
  for (std::size_t j = 0; j < k; ++j) out << ",alpha_" << j;
  out << ",clipped\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].ok()) continue;
    const auto& a = *results[i].value;
    out << i << ',' << format_real(a.score) << ',' << (a.stable ? 1 : 0);
    for (double v : a.alphas) out << ',' << format_real(v);
    out << ',' << (a.clipped ? 1 : 0) << '\n';
  }
}

void write_affinity_csv(const std::filesystem::path& path, const std::vector<PointResult>& results, std::size_t k) {
  auto out = open_out(path);
  write_affinity_csv(out, results, k);
}

std::vector<AffinityRow> read_affinity_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<AffinityRow> rows;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (lineno == 1) {
      if (fields.size() < 5 || fields[0] != "id") fail(ErrorCode::kParse, path.string(), lineno, "missing affinity header");
      k = fields.size() - 4;
      continue;
    }
    if (fields.size() != k + 4) fail(ErrorCode::kParse, path.string(), lineno, "wrong field count");
    AffinityRow row;
    long long id = 0, stable = 0, clipped = 0;
    if (!parse_int(fields[0], id) || !parse_real(fields[1], row.score) || !parse_int(fields[2], stable) ||
        !parse_int(fields.back(), clipped)) {
      fail(ErrorCode::kParse, path.string(), lineno, "malformed affinity row");
    }
    row.id = static_cast<std::size_t>(id);
    row.stable = stable != 0;
    row.clipped = clipped != 0;
    row.alphas.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      if (!parse_real(fields[3 + j], row.alphas[j])) fail(ErrorCode::kParse, path.string(), lineno, "malformed alpha");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& rows) {
  auto out = open_out(path);
  out << "metric,value\n";
  for (const auto& [metric, value] : rows) out << metric << ',' << value << '\n';
}

}  // namespace affinity
