#include "crowdverify/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace crowdverify {

namespace {

constexpr double kEps = 1e-9;

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

double signed_area(const std::vector<Point2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double ex = a.x + t * dx - p.x;
  double ey = a.y + t * dy - p.y;
  return ex * ex + ey * ey <= kEps * kEps;
}

// Closed-segment intersection with exact orientation signs.
bool segments_touch(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  auto sgn = [](double v) { return (v > 0.0) - (v < 0.0); };
  int o1 = sgn(cross(a, b, c));
  int o2 = sgn(cross(a, b, d));
  int o3 = sgn(cross(c, d, a));
  int o4 = sgn(cross(c, d, b));
  if (o1 != o2 && o3 != o4) return true;
  auto within = [](const Point2& p, const Point2& q, const Point2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  if (o1 == 0 && within(a, b, c)) return true;
  if (o2 == 0 && within(a, b, d)) return true;
  if (o3 == 0 && within(c, d, a)) return true;
  if (o4 == 0 && within(c, d, b)) return true;
  return false;
}

bool is_simple(const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (poly[i] == poly[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& c = poly[j];
      const auto& d = poly[(j + 1) % n];
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared vertex only; a fold-back along the same line is a self-overlap.
        const Point2& shared = (j == i + 1) ? b : a;
        const Point2& other_i = (j == i + 1) ? a : b;
        const Point2& other_j = (j == i + 1) ? d : c;
        if (cross(shared, other_i, other_j) == 0.0) {
          double dot = (other_i.x - shared.x) * (other_j.x - shared.x) +
                       (other_i.y - shared.y) * (other_j.y - shared.y);
          if (dot > 0.0) return false;
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

// Strict interior: boundary points (within kEps) are outside.
bool strictly_inside(const std::vector<Point2>& poly, const Point2& p) {
  bool inside = false;
  for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if (on_segment(p, a, b)) return false;
    if ((a.y > p.y) != (b.y > p.y)) {
      double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool segment_hits_prism(const Point3& a, const Point3& b, const Building& bldg) {
  const double h = bldg.height;
  if (std::min(a.z, b.z) >= h - kEps) return false;
  const auto& poly = bldg.footprint;
  const Point2 a2{a.x, a.y};
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;

  if (len2 < 1e-18) {
    return strictly_inside(poly, a2) && std::max(a.z, b.z) > kEps;
  }

  // Parameters in (0, 1) where the projected segment meets the footprint boundary.
  std::vector<double> ts{0.0, 1.0};
  for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    const double ex = q.x - p.x;
    const double ey = q.y - p.y;
    const double wx = p.x - a2.x;
    const double wy = p.y - a2.y;
    const double denom = cross(dx, dy, ex, ey);
    const double scale = std::sqrt(len2 * (ex * ex + ey * ey));
    if (std::abs(denom) > 1e-12 * scale) {
      double t = cross(wx, wy, ex, ey) / denom;
      double u = cross(wx, wy, dx, dy) / denom;
      if (u >= -kEps && u <= 1.0 + kEps && t > 0.0 && t < 1.0) ts.push_back(t);
    } else if (std::abs(cross(wx, wy, dx, dy)) <= kEps * std::sqrt(len2)) {
      for (const auto& v : {p, q}) {
        double t = ((v.x - a2.x) * dx + (v.y - a2.y) * dy) / len2;
        if (t > 0.0 && t < 1.0) ts.push_back(t);
      }
    }
  }
  std::sort(ts.begin(), ts.end());

  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double t0 = ts[k];
    const double t1 = ts[k + 1];
    if (t1 - t0 <= 1e-15) continue;
    const double tm = 0.5 * (t0 + t1);
    if (!strictly_inside(poly, Point2{a2.x + tm * dx, a2.y + tm * dy})) continue;
    const double z0 = a.z + t0 * (b.z - a.z);
    const double z1 = a.z + t1 * (b.z - a.z);
    if (std::min(z0, z1) < h - kEps && std::max(z0, z1) > kEps) return true;
  }
  return false;
}

bool finite(const Point2& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw GeometryError("city model: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; });
    if (!ok) throw GeometryError("city model: unknown key '" + key + "' in " + where);
  }
}

Point2 parse_point2(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw GeometryError("city model: expected [x, y] number pair");
  }
  return Point2{j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

double distance2d(const Point3& a, const Point3& b) { return std::hypot(a.x - b.x, a.y - b.y); }

ValidationError::ValidationError(std::size_t building, const std::string& what)
    : GeometryError("building " + std::to_string(building) + ": " + what), building_(building) {}

UrbanModel::UrbanModel(Rect bounds, std::vector<Building> buildings)
    : bounds_(bounds), buildings_(std::move(buildings)) {
  if (!finite(bounds_.min) || !finite(bounds_.max) || !(bounds_.max.x > bounds_.min.x) ||
      !(bounds_.max.y > bounds_.min.y)) {
    throw GeometryError("city model: bounds must be finite with max > min");
  }
  for (std::size_t i = 0; i < buildings_.size(); ++i) {
    const auto& b = buildings_[i];
    if (b.footprint.size() < 3) throw ValidationError(i, "footprint needs at least 3 vertices");
    if (!std::isfinite(b.height) || b.height <= 0.0) throw ValidationError(i, "height must be positive");
    for (const auto& v : b.footprint) {
      if (!finite(v)) throw ValidationError(i, "non-finite vertex");
      if (!bounds_.contains(v)) throw ValidationError(i, "vertex out of bounds");
    }
    if (!is_simple(b.footprint)) throw ValidationError(i, "self-intersecting footprint");
    if (!(signed_area(b.footprint) > 0.0)) throw ValidationError(i, "footprint must be counter-clockwise");
  }
  build_index();
}

void UrbanModel::build_index() {
  boxes_.clear();
  boxes_.reserve(buildings_.size());
  for (const auto& b : buildings_) {
    BuildingBox box{b.footprint.front(), b.footprint.front()};
    for (const auto& v : b.footprint) {
      box.lo.x = std::min(box.lo.x, v.x);
      box.lo.y = std::min(box.lo.y, v.y);
      box.hi.x = std::max(box.hi.x, v.x);
      box.hi.y = std::max(box.hi.y, v.y);
    }
    boxes_.push_back(box);
  }
  auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(buildings_.size()))));
  grid_nx_ = grid_ny_ = std::clamp<std::size_t>(side, 1, 256);
  grid_dx_ = bounds_.width() / static_cast<double>(grid_nx_);
  grid_dy_ = bounds_.height() / static_cast<double>(grid_ny_);
  grid_.assign(grid_nx_ * grid_ny_, {});
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const auto& box = boxes_[i];
    std::size_t x0 = cell_of(box.lo.x, bounds_.min.x, grid_dx_, grid_nx_);
    std::size_t x1 = cell_of(box.hi.x, bounds_.min.x, grid_dx_, grid_nx_);
    std::size_t y0 = cell_of(box.lo.y, bounds_.min.y, grid_dy_, grid_ny_);
    std::size_t y1 = cell_of(box.hi.y, bounds_.min.y, grid_dy_, grid_ny_);
    for (std::size_t iy = y0; iy <= y1; ++iy) {
      for (std::size_t ix = x0; ix <= x1; ++ix) grid_[iy * grid_nx_ + ix].push_back(static_cast<std::uint32_t>(i));
    }
  }
}

std::size_t UrbanModel::cell_of(double v, double lo, double size, std::size_t n) const {
  double c = std::floor((v - lo) / size);
  if (!(c > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(c), n - 1);
}

// Visits every building whose grid cells the projected segment may cross
// (conservatively padded); ids may repeat.
template <typename Visit>
void UrbanModel::for_each_candidate(const Point2& a, const Point2& b, Visit&& visit) const {
  constexpr double pad = 1e-6;
  const double xmin = std::min(a.x, b.x) - pad;
  const double xmax = std::max(a.x, b.x) + pad;
  const std::size_t ix0 = cell_of(xmin, bounds_.min.x, grid_dx_, grid_nx_);
  const std::size_t ix1 = cell_of(xmax, bounds_.min.x, grid_dx_, grid_nx_);
  const double dx = b.x - a.x;
  for (std::size_t ix = ix0; ix <= ix1; ++ix) {
    double cl = std::max(xmin, bounds_.min.x + static_cast<double>(ix) * grid_dx_ - pad);
    double cr = std::min(xmax, bounds_.min.x + static_cast<double>(ix + 1) * grid_dx_ + pad);
    if (ix == ix0) cl = xmin;
    if (ix == ix1) cr = xmax;
    double ylo;
    double yhi;
    if (std::abs(dx) < 1e-12) {
      ylo = std::min(a.y, b.y);
      yhi = std::max(a.y, b.y);
    } else {
      auto y_at = [&](double x) {
        double t = std::clamp((x - a.x) / dx, 0.0, 1.0);
        return a.y + t * (b.y - a.y);
      };
      double y0 = y_at(cl);
      double y1 = y_at(cr);
      ylo = std::min(y0, y1);
      yhi = std::max(y0, y1);
    }
    const std::size_t iy0 = cell_of(ylo - pad, bounds_.min.y, grid_dy_, grid_ny_);
    const std::size_t iy1 = cell_of(yhi + pad, bounds_.min.y, grid_dy_, grid_ny_);
    for (std::size_t iy = iy0; iy <= iy1; ++iy) {
      for (std::uint32_t id : grid_[iy * grid_nx_ + ix]) {
        if (visit(id)) return;
      }
    }
  }
}

bool UrbanModel::has_los(const Point3& a, const Point3& b) const {
  if (buildings_.empty()) return true;
  const double zmin = std::min(a.z, b.z);
  const Point2 a2{a.x, a.y};
  const Point2 b2{b.x, b.y};
  const double bx_lo = std::min(a.x, b.x);
  const double bx_hi = std::max(a.x, b.x);
  const double by_lo = std::min(a.y, b.y);
  const double by_hi = std::max(a.y, b.y);
  bool blocked = false;
  for_each_candidate(a2, b2, [&](std::uint32_t id) {
    const auto& bldg = buildings_[id];
    if (zmin >= bldg.height - kEps) return false;
    const auto& box = boxes_[id];
    if (box.hi.x < bx_lo || box.lo.x > bx_hi || box.hi.y < by_lo || box.lo.y > by_hi) return false;
    blocked = segment_hits_prism(a, b, bldg);
    return blocked;
  });
  return !blocked;
}

bool UrbanModel::is_indoor(const Point2& p) const {
  bool indoor = false;
  for_each_candidate(p, p, [&](std::uint32_t id) {
    const auto& box = boxes_[id];
    if (p.x < box.lo.x || p.x > box.hi.x || p.y < box.lo.y || p.y > box.hi.y) return false;
    indoor = strictly_inside(buildings_[id].footprint, p);
    return indoor;
  });
  return indoor;
}

bool UrbanModel::is_inside_building(const Point3& p) const {
  bool inside = false;
  const Point2 p2{p.x, p.y};
  for_each_candidate(p2, p2, [&](std::uint32_t id) {
    const auto& bldg = buildings_[id];
    if (p.z >= bldg.height - kEps || p.z <= kEps) return false;
    inside = strictly_inside(bldg.footprint, p2);
    return inside;
  });
  return inside;
}

bool has_los(const Point3& a, const Point3& b, const UrbanModel& model) { return model.has_los(a, b); }

UrbanModel urban_model_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc, {"version", "bounds", "buildings"}, "top level");
  if (!doc.contains("version") || doc["version"] != 1) throw GeometryError("city model: version must be 1");
  if (!doc.contains("bounds") || !doc.contains("buildings")) {
    throw GeometryError("city model: missing 'bounds' or 'buildings'");
  }
  const auto& jb = doc["bounds"];
  reject_unknown_keys(jb, {"min", "max"}, "bounds");
  if (!jb.contains("min") || !jb.contains("max")) throw GeometryError("city model: bounds needs min and max");
  Rect bounds{parse_point2(jb["min"]), parse_point2(jb["max"])};

  if (!doc["buildings"].is_array()) throw GeometryError("city model: 'buildings' must be an array");
  std::vector<Building> buildings;
  for (const auto& jbld : doc["buildings"]) {
    reject_unknown_keys(jbld, {"footprint", "height"}, "building " + std::to_string(buildings.size()));
    if (!jbld.contains("footprint") || !jbld["footprint"].is_array() || !jbld.contains("height") ||
        !jbld["height"].is_number()) {
      throw GeometryError("city model: building " + std::to_string(buildings.size()) +
                          " needs a footprint array and numeric height");
    }
    Building b;
    for (const auto& v : jbld["footprint"]) b.footprint.push_back(parse_point2(v));
    b.height = jbld["height"].get<double>();
    buildings.push_back(std::move(b));
  }
  return UrbanModel(bounds, std::move(buildings));
}

nlohmann::json urban_model_to_json(const UrbanModel& model) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["bounds"] = {{"min", {model.bounds().min.x, model.bounds().min.y}},
                   {"max", {model.bounds().max.x, model.bounds().max.y}}};
  auto arr = nlohmann::json::array();
  for (const auto& b : model.buildings()) {
    auto fp = nlohmann::json::array();
    for (const auto& v : b.footprint) fp.push_back({v.x, v.y});
    arr.push_back({{"footprint", fp}, {"height", b.height}});
  }
  doc["buildings"] = std::move(arr);
  return doc;
}

UrbanModel load_urban_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open city model " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw GeometryError("city model parse error in " + path.string() + ": " + e.what());
  }
  return urban_model_from_json(doc);
}

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64), bits_(rows * words_per_row_, 0) {}

bool BitMatrix::get(std::size_t r, std::size_t c) const {
  return (bits_[r * words_per_row_ + c / 64] >> (c % 64)) & 1u;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool v) {
  auto& w = bits_[r * words_per_row_ + c / 64];
  const std::uint64_t mask = std::uint64_t{1} << (c % 64);
  w = v ? (w | mask) : (w & ~mask);
}

std::size_t BitMatrix::row_count(std::size_t r) const {
  std::size_t n = 0;
  for (std::size_t w = 0; w < words_per_row_; ++w) n += std::popcount(bits_[r * words_per_row_ + w]);
  return n;
}

BitMatrix BitMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  BitMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw std::invalid_argument("BitMatrix::from_rows: ragged rows");
    for (std::size_t c = 0; c < m.cols(); ++c) m.set(r, c, rows[r][c] != 0);
  }
  return m;
}

BitMatrix visibility_matrix(std::span<const Point3> sites, std::span<const Point3> targets,
                            const UrbanModel& model, unsigned threads) {
  if (sites.empty() || targets.empty()) throw std::invalid_argument("visibility_matrix: empty sites or targets");
  BitMatrix out(sites.size(), targets.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(sites.size()));

  // Rows are disjoint word ranges, so workers never share a word.
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < sites.size(); i += stride) {
      for (std::size_t j = 0; j < targets.size(); ++j) out.set(i, j, model.has_los(sites[i], targets[j]));
    }
  };
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return out;
}

Point3 GroundGrid::cell_center(std::size_t index) const {
  const std::size_t ix = index % nx;
  const std::size_t iy = index / nx;
  return Point3{origin.x + (static_cast<double>(ix) + 0.5) * cell_size,
                origin.y + (static_cast<double>(iy) + 0.5) * cell_size, sample_height};
}

Rect GroundGrid::extent() const {
  return Rect{origin, Point2{origin.x + static_cast<double>(nx) * cell_size,
                             origin.y + static_cast<double>(ny) * cell_size}};
}

GroundGrid GroundGrid::covering(const Rect& bounds, double cell_size, double sample_height) {
  GroundGrid g;
  g.origin = bounds.min;
  g.cell_size = cell_size;
  g.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bounds.width() / cell_size - 1e-9)));
  g.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(bounds.height() / cell_size - 1e-9)));
  g.sample_height = sample_height;
  validate(g);
  return g;
}

void validate(const GroundGrid& grid) {
  if (!(grid.cell_size > 0.0) || !std::isfinite(grid.cell_size)) throw GeometryError("ground grid: cell_size must be > 0");
  if (grid.nx < 1 || grid.ny < 1) throw GeometryError("ground grid: nx and ny must be >= 1");
  if (!finite(grid.origin) || !std::isfinite(grid.sample_height)) throw GeometryError("ground grid: non-finite origin");
}

std::vector<Point3> outdoor_targets(const GroundGrid& grid, const UrbanModel& model) {
  std::vector<Point3> out;
  out.reserve(grid.cell_count());
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    Point3 c = grid.cell_center(i);
    if (!model.is_indoor(Point2{c.x, c.y})) out.push_back(c);
  }
  return out;
}

std::vector<Point3> candidate_sites(const UrbanModel& model, double altitude, double spacing) {
  if (!(spacing > 0.0) || !(altitude > 0.0)) throw GeometryError("candidate_sites: altitude and spacing must be > 0");
  const auto& b = model.bounds();
  auto count = [&](double extent) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(extent / spacing + 1e-9)));
  };
  const std::size_t nx = count(b.width());
  const std::size_t ny = count(b.height());
  const double ox = b.min.x + 0.5 * (b.width() - static_cast<double>(nx - 1) * spacing);
  const double oy = b.min.y + 0.5 * (b.height() - static_cast<double>(ny - 1) * spacing);
  std::vector<Point3> sites;
  sites.reserve(nx * ny);
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      Point3 p{ox + static_cast<double>(ix) * spacing, oy + static_cast<double>(iy) * spacing, altitude};
      if (!model.is_inside_building(p)) sites.push_back(p);
    }
  }
  return sites;
}

}  // namespace crowdverify
