#pragma once

// 3D extruded-footprint city model and line-of-sight queries.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace crowdverify {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Local East-North-Up coordinates, meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

double distance(const Point3& a, const Point3& b);
double distance2d(const Point3& a, const Point3& b);

struct Rect {
  Point2 min;
  Point2 max;

  bool contains(const Point2& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

struct Building {
  std::vector<Point2> footprint;  // counter-clockwise, simple
  double height = 0.0;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown for a model that parses but breaks a Building/UrbanModel invariant.
class ValidationError : public GeometryError {
 public:
  ValidationError(std::size_t building, const std::string& what);
  std::size_t building_index() const { return building_; }

 private:
  std::size_t building_;
};

/// Immutable city model. Construction validates every building and builds a
/// uniform-grid index used to prune line-of-sight tests.
class UrbanModel {
 public:
  UrbanModel(Rect bounds, std::vector<Building> buildings);

  const Rect& bounds() const { return bounds_; }
  const std::vector<Building>& buildings() const { return buildings_; }

  bool has_los(const Point3& a, const Point3& b) const;

  /// True if the 2D point lies strictly inside some footprint.
  bool is_indoor(const Point2& p) const;

  /// True if the point lies strictly inside some building volume.
  bool is_inside_building(const Point3& p) const;

 private:
  struct BuildingBox {
    Point2 lo;
    Point2 hi;
  };

  void build_index();
  std::size_t cell_of(double v, double lo, double size, std::size_t n) const;
  template <typename Visit>
  void for_each_candidate(const Point2& a, const Point2& b, Visit&& visit) const;

  Rect bounds_;
  std::vector<Building> buildings_;
  std::vector<BuildingBox> boxes_;

  // Uniform grid index: cell -> building ids whose bbox overlaps the cell.
  std::size_t grid_nx_ = 1;
  std::size_t grid_ny_ = 1;
  double grid_dx_ = 1.0;
  double grid_dy_ = 1.0;
  std::vector<std::vector<std::uint32_t>> grid_;
};

UrbanModel urban_model_from_json(const nlohmann::json& doc);
nlohmann::json urban_model_to_json(const UrbanModel& model);
UrbanModel load_urban_model(const std::filesystem::path& path);

bool has_los(const Point3& a, const Point3& b, const UrbanModel& model);

/// Row-major bit matrix, rows = sites, cols = targets.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool get(std::size_t r, std::size_t c) const;
  void set(std::size_t r, std::size_t c, bool v);
  std::size_t row_count(std::size_t r) const;
  std::span<const std::uint64_t> row_words(std::size_t r) const {
    return {bits_.data() + r * words_per_row_, words_per_row_};
  }

  static BitMatrix from_rows(const std::vector<std::vector<int>>& rows);

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Entry (i, j) = has_los(sites[i], targets[j]). Parallel over rows when
/// threads > 1; the result does not depend on the thread count.
BitMatrix visibility_matrix(std::span<const Point3> sites, std::span<const Point3> targets,
                            const UrbanModel& model, unsigned threads = 0);

struct GroundGrid {
  Point2 origin;
  double cell_size = 30.0;
  std::size_t nx = 1;
  std::size_t ny = 1;
  double sample_height = 1.5;

  std::size_t cell_count() const { return nx * ny; }
  /// Row-major: index = iy * nx + ix.
  Point3 cell_center(std::size_t index) const;
  Rect extent() const;

  static GroundGrid covering(const Rect& bounds, double cell_size, double sample_height = 1.5);
};

void validate(const GroundGrid& grid);

/// Cell centers of the grid that are not inside a building footprint.
std::vector<Point3> outdoor_targets(const GroundGrid& grid, const UrbanModel& model);

/// Horizontal lattice of hover positions at a fixed altitude, offset half a
/// spacing from the bounds; positions inside a building volume are skipped.
std::vector<Point3> candidate_sites(const UrbanModel& model, double altitude, double spacing);

}  // namespace crowdverify
