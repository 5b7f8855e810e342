#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "types.hpp"

namespace lglmf {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

// Great-circle distance on a spherical Earth.
double haversine_km(GeoPoint a, GeoPoint b);

enum class GammaUnit { kilometers, meters };

struct GeoParams {
  double alpha_km = 20.0;  // activity region radius around the HAL
  double gamma = 10.0;     // neighbor radius around a candidate POI
  GammaUnit gamma_unit = GammaUnit::kilometers;

  double gamma_km() const {
    return gamma_unit == GammaUnit::meters ? gamma / 1000.0 : gamma;
  }
  void validate() const;
};

// Latitude/longitude bucket index over a fixed POI set. Cells are at least
// cell_size_km wide in both axes (longitude widths grow per latitude band),
// so radius queries scan a bounded neighborhood of cells and apply the exact
// haversine test to the candidates. Query results therefore match a naive
// all-pairs filter exactly.
class SpatialGrid {
public:
  SpatialGrid(std::span<const Poi> pois, double cell_size_km);

  // Indices of the POIs strictly closer than radius_km, sorted ascending.
  std::vector<std::uint32_t> neighbors_within(GeoPoint center, double radius_km) const;

  double cell_size_km() const { return cell_size_km_; }
  std::size_t cell_count() const { return cells_.size(); }

private:
  struct BandShape {
    double width_deg;  // longitude width of one cell
    std::int32_t n_cells;
  };
  BandShape band_shape(std::int32_t band) const;
  static std::uint64_t cell_key(std::int32_t band, std::int32_t lon_idx) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(band)) << 32) |
           static_cast<std::uint32_t>(lon_idx);
  }

  double cell_size_km_;
  double band_height_deg_;
  std::vector<GeoPoint> points_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

// Coordinates of the user's most frequently checked-in POI; count ties break
// to the lowest POI index. Cold-user error when the row is empty.
GeoPoint high_activity_location(std::uint32_t user, const InteractionMatrix& m,
                                const Dataset& d);

// 1 - visited_neighbor_count / user_profile_size.
double poi_locality(std::uint32_t visited_neighbor_count, std::uint32_t user_profile_size);

// Sparse user x POI locality scores. Rows only hold entries for unvisited
// POIs inside the user's activity region; everything else is implicitly 0.
class LocalityModel {
public:
  struct Entry {
    std::uint32_t poi = 0;
    double value = 0.0;
  };

  LocalityModel() = default;
  LocalityModel(std::uint32_t rows, std::uint32_t cols, GeoParams params,
                std::vector<std::size_t> row_ptr, std::vector<Entry> entries,
                std::uint64_t dataset_fingerprint)
      : rows_(rows), cols_(cols), params_(params), row_ptr_(std::move(row_ptr)),
        entries_(std::move(entries)), dataset_fingerprint_(dataset_fingerprint) {}

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }
  const GeoParams& params() const { return params_; }
  std::uint64_t dataset_fingerprint() const { return dataset_fingerprint_; }

  std::span<const Entry> row(std::uint32_t u) const {
    return {entries_.data() + row_ptr_[u], entries_.data() + row_ptr_[u + 1]};
  }

  // 0 for pairs without a stored entry.
  double value(std::uint32_t u, std::uint32_t p) const;

  std::size_t nnz() const { return entries_.size(); }

private:
  std::uint32_t rows_ = 0;
  std::uint32_t cols_ = 0;
  GeoParams params_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> entries_;
  std::uint64_t dataset_fingerprint_ = 0;
};

// Algorithm: per user, take the HAL, collect unvisited POIs strictly inside
// alpha_km, and score each as 1 - L/|P_u| where L counts the user's distinct
// visited POIs strictly inside gamma of the candidate. Grid-accelerated;
// results are identical to the naive triple loop.
LocalityModel compute_locality_model(const InteractionMatrix& train, const Dataset& d,
                                     const GeoParams& params, unsigned threads = 1);

void save_locality(const LocalityModel& model, const std::string& path_stem);
LocalityModel load_locality(const std::string& path_stem);

}  // namespace lglmf
