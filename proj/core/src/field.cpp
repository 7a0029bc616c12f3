#include "affinity/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace affinity {

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) throw Error(ErrorCode::kInvalidArgument, "grid needs at least 2 nodes per axis");
  if (!(x_max > x_min) || !(y_max > y_min)) throw Error(ErrorCode::kInvalidArgument, "grid extent is empty");
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) || !std::isfinite(y_max)) {
    throw Error(ErrorCode::kInvalidArgument, "grid extent must be finite");
  }
}

ScalarFieldGrid ScalarFieldGrid::from_spec(const GridSpec& spec) {
  spec.validate();
  ScalarFieldGrid g;
  g.origin = {spec.x_min, spec.y_min};
  g.nx = spec.nx;
  g.ny = spec.ny;
  g.dx = (spec.x_max - spec.x_min) / static_cast<double>(spec.nx - 1);
  g.dy = (spec.y_max - spec.y_min) / static_cast<double>(spec.ny - 1);
  g.scores.assign(spec.nx * spec.ny, 0.0);
  return g;
}

ScalarFieldGrid evaluate_affinity_field(const ClusterModel& model, const DistanceMeasure& measure,
                                        const SamplerConfig& config, const GridSpec& spec,
                                        const FieldOptions& options) {
  if (model.dim() != 2) throw Error(ErrorCode::kDimensionMismatch, "affinity fields are two-dimensional");
  config.validate();
  ScalarFieldGrid grid = ScalarFieldGrid::from_spec(spec);
  Box box;
  if (options.box) {
    box = *options.box;
  } else {
    std::vector<Vector> pts = model.representatives();
    pts.push_back(Eigen::Vector2d(spec.x_min, spec.y_min));
    pts.push_back(Eigen::Vector2d(spec.x_max, spec.y_max));
    box = Box::around(pts, options.box_inflation);
  }

  std::vector<std::string> errors(grid.scores.size());
  parallel_for(grid.scores.size(), options.threads, [&](std::size_t idx) {
    const std::size_t i = idx % grid.nx;
    const std::size_t j = idx / grid.nx;
    SamplerConfig local = config;
    local.seed = mix_seed(config.seed, idx);
    try {
      const Vector q = grid.node(i, j);
      grid.scores[idx] = affinity_point(q, model, measure, local, box).score;
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  });
  for (std::size_t idx = 0; idx < errors.size(); ++idx) {
    if (!errors[idx].empty()) {
      throw Error(ErrorCode::kInvalidArgument, "field node (" + std::to_string(idx % grid.nx) + ", " +
                                                   std::to_string(idx / grid.nx) + "): " + errors[idx]);
    }
  }
  return grid;
}

unsigned char heatmap_pixel(double score) {
  const double clamped = std::min(1.0, std::max(0.0, score));
  return static_cast<unsigned char>(std::lround(255.0 * (1.0 - clamped)));
}

void write_heatmap_pgm(const ScalarFieldGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  std::vector<char> row(grid.nx);
  for (std::size_t r = 0; r < grid.ny; ++r) {
    const std::size_t j = grid.ny - 1 - r;
    for (std::size_t i = 0; i < grid.nx; ++i) row[i] = static_cast<char>(heatmap_pixel(grid.at(i, j)));
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

Pgm read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string magic;
  std::size_t maxval = 0;
  Pgm pgm;
  in >> magic >> pgm.width >> pgm.height >> maxval;
  if (magic != "P5" || maxval != 255 || !in) throw Error(ErrorCode::kParse, path.string() + " is not an 8-bit P5 file");
  in.get();
  pgm.pixels.resize(pgm.width * pgm.height);
  in.read(reinterpret_cast<char*>(pgm.pixels.data()), static_cast<std::streamsize>(pgm.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pgm.pixels.size())) {
    throw Error(ErrorCode::kParse, path.string() + " is truncated");
  }
  return pgm;
}

namespace {

// Crossing point on the edge between nodes (ia, ja) and (ib, jb). Endpoints
// are ordered canonically so both cells sharing an edge produce the same
// coordinates bit for bit.
Eigen::Vector2d edge_point(const ScalarFieldGrid& g, double level, std::size_t ia, std::size_t ja,
                           std::size_t ib, std::size_t jb) {
  if (jb < ja || (jb == ja && ib < ia)) {
    std::swap(ia, ib);
    std::swap(ja, jb);
  }
  const double va = g.at(ia, ja);
  const double vb = g.at(ib, jb);
  const double t = va == vb ? 0.5 : (level - va) / (vb - va);
  const Eigen::Vector2d pa = g.node(ia, ja);
  const Eigen::Vector2d pb = g.node(ib, jb);
  return pa + t * (pb - pa);
}

}  // namespace

std::vector<ContourLevel> extract_contours(const ScalarFieldGrid& grid, const std::vector<double>& levels) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw Error(ErrorCode::kInvalidArgument, "contour levels must lie in (0, 1)");
    if (i > 0 && !(levels[i] > levels[i - 1])) throw Error(ErrorCode::kInvalidArgument, "contour levels must be strictly increasing");
  }
  std::vector<ContourLevel> out;
  out.reserve(levels.size());
  for (double level : levels) {
    ContourLevel cl{level, {}};
    for (std::size_t j = 0; j + 1 < grid.ny; ++j) {
      for (std::size_t i = 0; i + 1 < grid.nx; ++i) {
        // Corners counter-clockwise from the lower left.
        const std::array<double, 4> v{grid.at(i, j), grid.at(i + 1, j), grid.at(i + 1, j + 1), grid.at(i, j + 1)};
        const std::array<bool, 4> high{v[0] >= level, v[1] >= level, v[2] >= level, v[3] >= level};
        auto edge = [&](int e) -> Eigen::Vector2d {
          switch (e) {
            case 0: return edge_point(grid, level, i, j, i + 1, j);          // bottom
            case 1: return edge_point(grid, level, i + 1, j, i + 1, j + 1);  // right
            case 2: return edge_point(grid, level, i, j + 1, i + 1, j + 1);  // top
            default: return edge_point(grid, level, i, j, i, j + 1);         // left
          }
        };
        std::array<int, 4> crossing{};
        int count = 0;
        for (int e = 0; e < 4; ++e) {
          if (high[static_cast<std::size_t>(e)] != high[static_cast<std::size_t>((e + 1) % 4)]) crossing[count++] = e;
        }
        if (count == 2) {
          cl.segments.push_back({edge(crossing[0]), edge(crossing[1])});
        } else if (count == 4) {
          const bool center_high = (v[0] + v[1] + v[2] + v[3]) / 4.0 >= level;
          if (center_high == high[0]) {
            // corners 0 and 2 joined through the centre; 1 and 3 isolated
            cl.segments.push_back({edge(0), edge(1)});
            cl.segments.push_back({edge(2), edge(3)});
          } else {
            cl.segments.push_back({edge(3), edge(0)});
            cl.segments.push_back({edge(1), edge(2)});
          }
        }
      }
    }
    out.push_back(std::move(cl));
  }
  return out;
}

std::vector<std::vector<Eigen::Vector2d>> chain_segments(const std::vector<Segment>& segments, double tol) {
  std::vector<std::vector<Eigen::Vector2d>> lines;
  std::vector<bool> used(segments.size(), false);
  auto close = [tol](const Eigen::Vector2d& p, const Eigen::Vector2d& q) { return (p - q).norm() <= tol; };
  // Endpoint lookup on a quantised key; tolerance-checked afterwards.
  std::multimap<std::pair<long long, long long>, std::size_t> index;
  const double q = tol > 0.0 ? tol * 4.0 : 1e-12;
  auto key = [q](const Eigen::Vector2d& p) {
    return std::make_pair(std::llround(p.x() / q), std::llround(p.y() / q));
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    index.emplace(key(segments[s].a), s);
    index.emplace(key(segments[s].b), s);
  }
  auto find_next = [&](const Eigen::Vector2d& p) -> std::ptrdiff_t {
    const auto base = key(p);
    for (long long dxk = -1; dxk <= 1; ++dxk) {
      for (long long dyk = -1; dyk <= 1; ++dyk) {
        auto range = index.equal_range({base.first + dxk, base.second + dyk});
        for (auto it = range.first; it != range.second; ++it) {
          const std::size_t s = it->second;
          if (!used[s] && (close(segments[s].a, p) || close(segments[s].b, p))) return static_cast<std::ptrdiff_t>(s);
        }
      }
    }
    return -1;
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<Eigen::Vector2d> line{segments[s].a, segments[s].b};
    // Extend forward, then backward.
    for (int pass = 0; pass < 2; ++pass) {
      while (true) {
        const std::ptrdiff_t next = find_next(line.back());
        if (next < 0) break;
        const auto& seg = segments[static_cast<std::size_t>(next)];
        used[static_cast<std::size_t>(next)] = true;
        line.push_back(close(seg.a, line.back()) ? seg.b : seg.a);
      }
      if (pass == 0) {
        if (line.size() > 2 && close(line.front(), line.back())) break;
        std::reverse(line.begin(), line.end());
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_contours_svg(const ScalarFieldGrid& grid, const std::vector<ContourLevel>& contours,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  const double width = static_cast<double>(grid.nx - 1);
  const double height = static_cast<double>(grid.ny - 1);
  char buf[128];
  auto px = [&](const Eigen::Vector2d& p) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f", (p.x() - grid.origin.x()) / grid.dx,
                  height - (p.y() - grid.origin.y()) / grid.dy);
    return std::string(buf);
  };
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << grid.nx << "\" height=\""
      << grid.ny << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  const std::size_t n = contours.size();
  for (std::size_t l = 0; l < n; ++l) {
    // Lower levels (less confident) drawn darker.
    const int grey = n > 1 ? static_cast<int>(std::lround(160.0 * static_cast<double>(l) / static_cast<double>(n - 1))) : 0;
    std::snprintf(buf, sizeof buf, "%.6g", contours[l].level);
    out << "<g class=\"level\" data-level=\"" << buf << "\" fill=\"none\" stroke=\"rgb(" << grey << ',' << grey << ','
        << grey << ")\" stroke-width=\"0.5\">\n";
    for (const auto& line : chain_segments(contours[l].segments)) {
      out << "<path d=\"M" << px(line.front());
      for (std::size_t i = 1; i < line.size(); ++i) out << " L" << px(line[i]);
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

void write_field_csv(const ScalarFieldGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << "x,y,score\n";
  char buf[96];
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const Eigen::Vector2d p = grid.node(i, j);
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", p.x(), p.y(), grid.at(i, j));
      out << buf;
    }
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace affinity
