#include "geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "errors.hpp"
#include "util.hpp"

#include <json.hpp>

namespace lglmf {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kKmPerDegree = kEarthRadiusKm * kDegToRad;
constexpr double kMinCos = 1e-9;  // keeps polar bands finite

}  // namespace

double haversine_km(GeoPoint a, GeoPoint b) {
  double lat1 = a.lat * kDegToRad;
  double lat2 = b.lat * kDegToRad;
  double dlat = (b.lat - a.lat) * kDegToRad;
  double dlon = (b.lon - a.lon) * kDegToRad;
  double sl = std::sin(dlat / 2.0);
  double so = std::sin(dlon / 2.0);
  double h = sl * sl + std::cos(lat1) * std::cos(lat2) * so * so;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

void GeoParams::validate() const {
  if (!(alpha_km > 0.0))
    raise(ErrorCode::invalid_argument, "alpha_km must be > 0");
  if (!(gamma > 0.0))
    raise(ErrorCode::invalid_argument, "gamma must be > 0");
}

SpatialGrid::SpatialGrid(std::span<const Poi> pois, double cell_size_km)
    : cell_size_km_(cell_size_km) {
  if (!(cell_size_km > 0.0))
    raise(ErrorCode::invalid_argument, "grid cell size must be > 0");
  band_height_deg_ = cell_size_km / kKmPerDegree;
  points_.reserve(pois.size());
  for (std::uint32_t i = 0; i < pois.size(); ++i) {
    const Poi& p = pois[i];
    points_.push_back(GeoPoint{p.lat, p.lon});
    auto band = static_cast<std::int32_t>(std::floor(p.lat / band_height_deg_));
    BandShape shape = band_shape(band);
    auto lon_idx = static_cast<std::int32_t>(std::floor((p.lon + 180.0) / shape.width_deg));
    lon_idx = std::clamp(lon_idx, 0, shape.n_cells - 1);
    cells_[cell_key(band, lon_idx)].push_back(i);
  }
}

SpatialGrid::BandShape SpatialGrid::band_shape(std::int32_t band) const {
  // The pole-most band edge has the smallest cos, so dividing by it keeps the
  // physical cell width >= cell_size_km everywhere in the band.
  double edge_a = std::abs(band * band_height_deg_);
  double edge_b = std::abs((band + 1) * band_height_deg_);
  double max_abs_lat = std::min(90.0, std::max(edge_a, edge_b));
  double c = std::max(kMinCos, std::cos(max_abs_lat * kDegToRad));
  double min_width = cell_size_km_ / (kKmPerDegree * c);
  // Widths must divide 360 exactly so longitude indices wrap cleanly.
  auto n = static_cast<std::int32_t>(std::floor(360.0 / min_width));
  n = std::max(1, n);
  return BandShape{360.0 / n, n};
}

std::vector<std::uint32_t> SpatialGrid::neighbors_within(GeoPoint center,
                                                         double radius_km) const {
  if (!(radius_km > 0.0))
    raise(ErrorCode::invalid_argument, "radius must be > 0");
  std::vector<std::uint32_t> out;
  if (cells_.empty()) return out;

  // Any point within radius differs in latitude by at most radius/kKmPerDegree.
  double dlat_deg = radius_km / kKmPerDegree;
  auto band_lo = static_cast<std::int32_t>(std::floor((center.lat - dlat_deg) / band_height_deg_)) - 1;
  auto band_hi = static_cast<std::int32_t>(std::floor((center.lat + dlat_deg) / band_height_deg_)) + 1;
  auto band_min = static_cast<std::int32_t>(std::floor(-90.0 / band_height_deg_)) - 1;
  auto band_max = static_cast<std::int32_t>(std::floor(90.0 / band_height_deg_)) + 1;
  band_lo = std::max(band_lo, band_min);
  band_hi = std::min(band_hi, band_max);

  double cos_center = std::cos(center.lat * kDegToRad);
  // Valid while radius <= pi*R; larger radii degenerate to whole-band scans.
  double s = std::sin(std::min(std::numbers::pi / 2.0, radius_km / (2.0 * kEarthRadiusKm)));

  auto scan_cell = [&](std::int32_t band, std::int32_t idx) {
    auto it = cells_.find(cell_key(band, idx));
    if (it == cells_.end()) return;
    for (std::uint32_t i : it->second) {
      if (haversine_km(center, points_[i]) < radius_km) out.push_back(i);
    }
  };

  for (std::int32_t band = band_lo; band <= band_hi; ++band) {
    BandShape shape = band_shape(band);
    // Longitude half-width beyond which every point of this band is at least
    // radius away: sqrt(cos(center) * min band cos) * sin(dlon/2) >= sin(r/2R).
    double edge_a = std::abs(band * band_height_deg_);
    double edge_b = std::abs((band + 1) * band_height_deg_);
    double band_cos = std::max(kMinCos, std::cos(std::min(90.0, std::max(edge_a, edge_b)) * kDegToRad));
    double denom = std::sqrt(std::max(kMinCos * kMinCos, cos_center * band_cos));
    double ratio = s / denom;
    std::int32_t k_lo, k_hi;
    if (ratio >= 1.0) {
      k_lo = 0;
      k_hi = shape.n_cells - 1;
    } else {
      double dlon_deg = 2.0 * std::asin(ratio) / kDegToRad;
      k_lo = static_cast<std::int32_t>(std::floor((center.lon - dlon_deg + 180.0) / shape.width_deg)) - 1;
      k_hi = static_cast<std::int32_t>(std::floor((center.lon + dlon_deg + 180.0) / shape.width_deg)) + 1;
    }
    if (k_hi - k_lo + 1 >= shape.n_cells) {
      for (std::int32_t idx = 0; idx < shape.n_cells; ++idx) scan_cell(band, idx);
    } else {
      for (std::int32_t k = k_lo; k <= k_hi; ++k) {
        std::int32_t idx = ((k % shape.n_cells) + shape.n_cells) % shape.n_cells;
        scan_cell(band, idx);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

GeoPoint high_activity_location(std::uint32_t user, const InteractionMatrix& m,
                                const Dataset& d) {
  auto row = m.row(user);
  if (row.empty())
    raise(ErrorCode::cold_user,
          "user index " + std::to_string(user) + " has no training check-ins");
  std::uint32_t best_poi = row.front().poi;
  std::uint32_t best_count = row.front().count;
  for (const auto& e : row) {
    if (e.count > best_count) {  // row is poi-ascending, ties keep the lowest index
      best_count = e.count;
      best_poi = e.poi;
    }
  }
  const Poi& p = d.pois[best_poi];
  return GeoPoint{p.lat, p.lon};
}

double poi_locality(std::uint32_t visited_neighbor_count, std::uint32_t user_profile_size) {
  if (user_profile_size == 0)
    raise(ErrorCode::invalid_argument, "poi_locality: user profile is empty");
  if (visited_neighbor_count > user_profile_size)
    raise(ErrorCode::invalid_argument,
          "poi_locality: neighbor count exceeds the profile size");
  return 1.0 - static_cast<double>(visited_neighbor_count) /
                   static_cast<double>(user_profile_size);
}

double LocalityModel::value(std::uint32_t u, std::uint32_t p) const {
  auto r = row(u);
  auto it = std::lower_bound(r.begin(), r.end(), p,
                             [](const Entry& e, std::uint32_t key) { return e.poi < key; });
  if (it != r.end() && it->poi == p) return it->value;
  return 0.0;
}

LocalityModel compute_locality_model(const InteractionMatrix& train, const Dataset& d,
                                     const GeoParams& params, unsigned threads) {
  params.validate();
  if (train.rows() != d.user_count() || train.cols() != d.poi_count())
    raise(ErrorCode::invalid_argument, "interaction matrix does not match the dataset");

  double gamma_km = params.gamma_km();
  SpatialGrid grid(d.pois, gamma_km);  // neighbor queries dominate

  std::vector<std::vector<LocalityModel::Entry>> per_user(d.user_count());
  parallel_for(d.user_count(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> profile;
    for (std::size_t ui = begin; ui < end; ++ui) {
      auto u = static_cast<std::uint32_t>(ui);
      auto row = train.row(u);
      profile.clear();
      for (const auto& e : row) profile.push_back(e.poi);  // poi-ascending, distinct

      GeoPoint hal = high_activity_location(u, train, d);
      std::vector<std::uint32_t> region = grid.neighbors_within(hal, params.alpha_km);
      auto& entries = per_user[ui];
      for (std::uint32_t p : region) {
        if (std::binary_search(profile.begin(), profile.end(), p)) continue;
        const Poi& cand = d.pois[p];
        std::vector<std::uint32_t> nbrs =
            grid.neighbors_within(GeoPoint{cand.lat, cand.lon}, gamma_km);
        std::uint32_t visited_neighbors = 0;
        for (std::uint32_t q : nbrs) {
          if (std::binary_search(profile.begin(), profile.end(), q)) ++visited_neighbors;
        }
        entries.push_back({p, 1.0 - static_cast<double>(visited_neighbors) /
                                        static_cast<double>(profile.size())});
      }
    }
  });

  std::vector<std::size_t> row_ptr(d.user_count() + 1, 0);
  std::vector<LocalityModel::Entry> entries;
  for (std::uint32_t u = 0; u < d.user_count(); ++u) {
    row_ptr[u] = entries.size();
    entries.insert(entries.end(), per_user[u].begin(), per_user[u].end());
  }
  row_ptr[d.user_count()] = entries.size();
  return LocalityModel(d.user_count(), d.poi_count(), params, std::move(row_ptr),
                       std::move(entries), dataset_fingerprint(d));
}

void save_locality(const LocalityModel& model, const std::string& path_stem) {
  nlohmann::ordered_json header;
  header["format"] = "lglmf-locality-v1";
  header["rows"] = model.rows();
  header["cols"] = model.cols();
  header["alpha_km"] = model.params().alpha_km;
  header["gamma"] = model.params().gamma;
  header["gamma_unit"] = model.params().gamma_unit == GammaUnit::meters ? "m" : "km";
  header["dataset_fingerprint"] = hex64(model.dataset_fingerprint());
  header["entries"] = model.nnz();
  std::ofstream hf(path_stem + ".json");
  if (!hf) raise(ErrorCode::io, "cannot write locality header: " + path_stem + ".json");
  hf << header.dump(2) << '\n';

  std::ofstream tf(path_stem + ".tsv");
  if (!tf) raise(ErrorCode::io, "cannot write locality entries: " + path_stem + ".tsv");
  char buf[40];
  for (std::uint32_t u = 0; u < model.rows(); ++u) {
    for (const auto& e : model.row(u)) {
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      tf << u << '\t' << e.poi << '\t' << buf << '\n';
    }
  }
  if (!tf) raise(ErrorCode::io, "write error: " + path_stem + ".tsv");
}

LocalityModel load_locality(const std::string& path_stem) {
  std::ifstream hf(path_stem + ".json");
  if (!hf) raise(ErrorCode::io, "cannot open locality header: " + path_stem + ".json");
  nlohmann::json header;
  try {
    hf >> header;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::format, "bad locality header: " + std::string(e.what()));
  }
  if (header.value("format", "") != "lglmf-locality-v1")
    raise(ErrorCode::format, "unrecognized locality format in " + path_stem + ".json");

  GeoParams params;
  params.alpha_km = header.at("alpha_km").get<double>();
  params.gamma = header.at("gamma").get<double>();
  params.gamma_unit =
      header.at("gamma_unit").get<std::string>() == "m" ? GammaUnit::meters : GammaUnit::kilometers;
  auto rows = header.at("rows").get<std::uint32_t>();
  auto cols = header.at("cols").get<std::uint32_t>();
  std::uint64_t fingerprint = std::stoull(header.at("dataset_fingerprint").get<std::string>(),
                                          nullptr, 16);

  std::ifstream tf(path_stem + ".tsv");
  if (!tf) raise(ErrorCode::io, "cannot open locality entries: " + path_stem + ".tsv");
  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::vector<LocalityModel::Entry> entries;
  std::uint64_t prev_user = 0;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(tf, line)) {
    ++line_no;
    unsigned long long u = 0, p = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%llu\t%llu\t%lf", &u, &p, &v) != 3 ||
        u >= rows || p >= cols || u < prev_user)
      raise(ErrorCode::format,
            "bad locality entry at line " + std::to_string(line_no) + " of " + path_stem + ".tsv");
    while (prev_user < u) row_ptr[++prev_user] = entries.size();
    entries.push_back({static_cast<std::uint32_t>(p), v});
  }
  while (prev_user < rows) row_ptr[++prev_user] = entries.size();
  return LocalityModel(rows, cols, params, std::move(row_ptr), std::move(entries), fingerprint);
}

}  // namespace lglmf
