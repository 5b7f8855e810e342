#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "errors.hpp"
#include "util.hpp"

namespace lglmf {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool parse_int(std::string_view text, std::int64_t& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  std::string buf(text);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && std::isfinite(out);
}

}  // namespace

void Layout::validate() const {
  if (user_col < 0 || poi_col < 0 || user_col == poi_col)
    raise(ErrorCode::invalid_argument, "layout: user and poi columns must be distinct and >= 0");
  if (time_col >= 0 && (time_col == user_col || time_col == poi_col))
    raise(ErrorCode::invalid_argument, "layout: timestamp column collides with user/poi column");
}

std::string Layout::to_string() const {
  std::string s = std::to_string(user_col) + "," + std::to_string(poi_col) + ",";
  s += time_col < 0 ? "-" : std::to_string(time_col);
  return s;
}

Layout parse_layout(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
  if (parts.size() != 2 && parts.size() != 3)
    raise(ErrorCode::invalid_argument, "layout descriptor needs 2 or 3 comma-separated fields: " +
                                           std::string(text));
  auto field = [&](std::string_view p, const char* what) {
    std::int64_t v = 0;
    if (!parse_int(p, v) || v < 0 || v > 255)
      raise(ErrorCode::invalid_argument,
            std::string("layout: bad ") + what + " column: '" + std::string(p) + "'");
    return static_cast<int>(v);
  };
  Layout layout;
  layout.user_col = field(parts[0], "user");
  layout.poi_col = field(parts[1], "poi");
  if (parts.size() == 3 && parts[2] != "-" && !parts[2].empty())
    layout.time_col = field(parts[2], "timestamp");
  else
    layout.time_col = -1;
  layout.validate();
  return layout;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  if (text.empty() || text == "-") return std::nullopt;
  std::int64_t epoch = 0;
  if (parse_int(text, epoch)) return epoch;
  // ISO-8601 UTC: YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z')
    return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len, std::int64_t& out) {
    return parse_int(text.substr(pos, len), out);
  };
  std::int64_t year, month, day, hour, minute, second;
  if (!num(0, 4, year) || !num(5, 2, month) || !num(8, 2, day) || !num(11, 2, hour) ||
      !num(14, 2, minute) || !num(17, 2, second))
    return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
    return std::nullopt;
  std::tm tm{};
  tm.tm_year = static_cast<int>(year - 1900);
  tm.tm_mon = static_cast<int>(month - 1);
  tm.tm_mday = static_cast<int>(day);
  tm.tm_hour = static_cast<int>(hour);
  tm.tm_min = static_cast<int>(minute);
  tm.tm_sec = static_cast<int>(second);
  time_t t = timegm(&tm);
  if (t == static_cast<time_t>(-1)) return std::nullopt;
  return static_cast<std::int64_t>(t);
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  std::tm tm{};
  time_t t = static_cast<time_t>(epoch_seconds);
  gmtime_r(&t, &tm);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

std::vector<CheckIn> parse_checkins(std::istream& in, const Layout& layout, ParseStats* stats) {
  layout.validate();
  ParseStats local;
  std::vector<CheckIn> out;
  int max_col = std::max({layout.user_col, layout.poi_col, layout.time_col});
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = strip_cr(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      ++local.comments;
      continue;
    }
    ++local.lines;
    auto fields = split_tabs(view);
    if (static_cast<int>(fields.size()) <= max_col) {
      ++local.malformed;
      continue;
    }
    CheckIn rec;
    rec.user_id = std::string(fields[layout.user_col]);
    rec.poi_id = std::string(fields[layout.poi_col]);
    if (rec.user_id.empty() || rec.poi_id.empty()) {
      ++local.malformed;
      continue;
    }
    if (layout.time_col >= 0) {
      std::string_view raw = fields[layout.time_col];
      if (raw.empty() || raw == "-") {
        rec.timestamp = std::nullopt;
      } else {
        rec.timestamp = parse_timestamp(raw);
        if (!rec.timestamp) {
          ++local.malformed;
          continue;
        }
      }
    }
    ++local.parsed;
    out.push_back(std::move(rec));
  }
  if (in.bad()) raise(ErrorCode::io, "read error while parsing check-ins");
  if (local.lines > 0 && local.malformed * 2 > local.lines)
    raise(ErrorCode::format, "more than half of the input lines are malformed (" +
                                 std::to_string(local.malformed) + "/" +
                                 std::to_string(local.lines) +
                                 "); wrong layout descriptor?");
  if (stats) *stats = local;
  return out;
}

std::vector<CheckIn> parse_checkins_file(const std::string& path, const Layout& layout,
                                         ParseStats* stats) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open check-in file: " + path);
  return parse_checkins(in, layout, stats);
}

std::vector<Poi> parse_poi_coords(std::istream& in, PoiParseStats* stats) {
  PoiParseStats local;
  std::vector<Poi> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = strip_cr(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      ++local.comments;
      continue;
    }
    ++local.lines;
    auto fields = split_tabs(view);
    double lat = 0.0, lon = 0.0;
    if (fields.size() < 3 || fields[0].empty() || !parse_double(fields[1], lat) ||
        !parse_double(fields[2], lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
        lon > 180.0) {
      ++local.rejected;
      continue;
    }
    std::string id(fields[0]);
    if (seen.contains(id)) {
      ++local.duplicates;
      continue;
    }
    seen.emplace(id, out.size());
    out.push_back(Poi{std::move(id), lat, lon});
    ++local.parsed;
  }
  if (in.bad()) raise(ErrorCode::io, "read error while parsing POI coordinates");
  if (stats) *stats = local;
  return out;
}

std::vector<Poi> parse_poi_coords_file(const std::string& path, PoiParseStats* stats) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open POI file: " + path);
  return parse_poi_coords(in, stats);
}

Dataset assemble_dataset(const std::vector<CheckIn>& checkins, const std::vector<Poi>& pois,
                         AssembleStats* stats) {
  std::unordered_map<std::string_view, std::uint32_t> poi_coord;
  poi_coord.reserve(pois.size());
  for (std::size_t i = 0; i < pois.size(); ++i)
    poi_coord.emplace(pois[i].poi_id, static_cast<std::uint32_t>(i));

  AssembleStats local;
  Dataset d;
  std::unordered_map<std::string_view, std::uint32_t> user_index;
  std::unordered_map<std::string_view, std::uint32_t> poi_index;
  std::uint64_t seq = 0;
  for (const CheckIn& rec : checkins) {
    auto coord_it = poi_coord.find(rec.poi_id);
    if (coord_it == poi_coord.end()) {
      ++local.dropped_unknown_poi;
      ++seq;
      continue;
    }
    std::uint32_t u;
    if (auto it = user_index.find(rec.user_id); it != user_index.end()) {
      u = it->second;
    } else {
      u = d.user_count();
      d.users.push_back(rec.user_id);
      user_index.emplace(d.users.back(), u);
    }
    std::uint32_t p;
    if (auto it = poi_index.find(rec.poi_id); it != poi_index.end()) {
      p = it->second;
    } else {
      p = d.poi_count();
      d.pois.push_back(pois[coord_it->second]);
      poi_index.emplace(d.pois.back().poi_id, p);
    }
    d.checkins.push_back(Interaction{u, p, rec.timestamp, seq++});
  }
  if (stats) *stats = local;
  return d;
}

Dataset filter_dataset(const Dataset& d, std::uint32_t min_user_pois,
                       std::uint32_t min_poi_visitors) {
  if (min_user_pois < 1 || min_poi_visitors < 1)
    raise(ErrorCode::invalid_argument, "filter thresholds must be >= 1");

  std::vector<char> user_alive(d.user_count(), 1);
  std::vector<char> poi_alive(d.poi_count(), 1);

  // Distinct (user, poi) pairs drive both thresholds.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(d.checkins.size());
  for (const auto& c : d.checkins) pairs.emplace_back(c.user, c.poi);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  bool changed = true;
  std::vector<std::uint32_t> user_deg(d.user_count());
  std::vector<std::uint32_t> poi_deg(d.poi_count());
  while (changed) {
    changed = false;
    std::fill(user_deg.begin(), user_deg.end(), 0);
    std::fill(poi_deg.begin(), poi_deg.end(), 0);
    for (const auto& [u, p] : pairs) {
      if (!user_alive[u] || !poi_alive[p]) continue;
      ++user_deg[u];
      ++poi_deg[p];
    }
    for (std::uint32_t u = 0; u < d.user_count(); ++u) {
      if (user_alive[u] && user_deg[u] < min_user_pois) {
        user_alive[u] = 0;
        changed = true;
      }
    }
    for (std::uint32_t p = 0; p < d.poi_count(); ++p) {
      if (poi_alive[p] && poi_deg[p] < min_poi_visitors) {
        poi_alive[p] = 0;
        changed = true;
      }
    }
  }

  // Re-densify, preserving relative order.
  std::vector<std::uint32_t> user_map(d.user_count(), UINT32_MAX);
  std::vector<std::uint32_t> poi_map(d.poi_count(), UINT32_MAX);
  Dataset out;
  for (std::uint32_t u = 0; u < d.user_count(); ++u) {
    if (!user_alive[u]) continue;
    user_map[u] = out.user_count();
    out.users.push_back(d.users[u]);
  }
  for (std::uint32_t p = 0; p < d.poi_count(); ++p) {
    if (!poi_alive[p]) continue;
    poi_map[p] = out.poi_count();
    out.pois.push_back(d.pois[p]);
  }
  for (const auto& c : d.checkins) {
    if (user_map[c.user] == UINT32_MAX || poi_map[c.poi] == UINT32_MAX) continue;
    out.checkins.push_back(Interaction{user_map[c.user], poi_map[c.poi], c.timestamp, c.seq});
  }
  if (out.users.empty() || out.pois.empty() || out.checkins.empty())
    raise(ErrorCode::degenerate_dataset,
          "filtering removed everything (thresholds " + std::to_string(min_user_pois) + "/" +
              std::to_string(min_poi_visitors) + ")");
  return out;
}

namespace {

// Ascending temporal order; events without timestamps sort last. Ties break
// by poi_id lexicographically, then by original file position.
struct TemporalOrder {
  const Dataset* d;
  bool operator()(const Interaction& a, const Interaction& b) const {
    std::int64_t ta = a.timestamp.value_or(INT64_MAX);
    std::int64_t tb = b.timestamp.value_or(INT64_MAX);
    if (ta != tb) return ta < tb;
    const std::string& pa = d->pois[a.poi].poi_id;
    const std::string& pb = d->pois[b.poi].poi_id;
    if (pa != pb) return pa < pb;
    return a.seq < b.seq;
  }
};

std::vector<std::vector<Interaction>> per_user_sorted(const Dataset& d) {
  std::vector<std::vector<Interaction>> rows(d.user_count());
  for (const auto& c : d.checkins) rows[c.user].push_back(c);
  TemporalOrder order{&d};
  for (auto& row : rows) std::sort(row.begin(), row.end(), order);
  return rows;
}

// ceil/floor with a tolerance for products like 0.1 * 80 that land a hair
// above an exact integer.
std::size_t ceil_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

std::size_t floor_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace

void SplitSpec::validate() const {
  if (!(train > 0.0 && train < 1.0))
    raise(ErrorCode::invalid_argument, "split: train fraction must be in (0,1)");
  if (!(validation >= 0.0 && validation < 1.0))
    raise(ErrorCode::invalid_argument, "split: validation fraction must be in [0,1)");
  if (!(test > 0.0 && test < 1.0))
    raise(ErrorCode::invalid_argument, "split: test fraction must be in (0,1)");
  if (std::abs(train + validation + test - 1.0) > 1e-9)
    raise(ErrorCode::invalid_argument, "split: fractions must sum to 1");
}

SplitResult temporal_split(const Dataset& d, const SplitSpec& spec) {
  spec.validate();
  SplitResult result;
  result.train.users = result.validation.users = result.test.users = d.users;
  result.train.pois = result.validation.pois = result.test.pois = d.pois;

  auto rows = per_user_sorted(d);
  for (std::uint32_t u = 0; u < d.user_count(); ++u) {
    const auto& row = rows[u];
    if (row.size() < 3)
      raise(ErrorCode::split, "user '" + d.users[u] + "' has fewer than 3 check-ins (" +
                                  std::to_string(row.size()) + ")");
    std::size_t n = row.size();
    std::size_t n_train = std::min(n, ceil_count(spec.train, n));
    std::size_t n_test = std::min(n - n_train, floor_count(spec.test, n));
    for (std::size_t i = 0; i < n_train; ++i) result.train.checkins.push_back(row[i]);
    for (std::size_t i = n_train; i < n - n_test; ++i)
      result.validation.checkins.push_back(row[i]);
    for (std::size_t i = n - n_test; i < n; ++i) result.test.checkins.push_back(row[i]);
  }
  return result;
}

Dataset subsample_training(const Dataset& train, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    raise(ErrorCode::invalid_argument,
          "subsample fraction must be in (0,1], got " + std::to_string(fraction));
  Dataset out;
  out.users = train.users;
  out.pois = train.pois;
  auto rows = per_user_sorted(train);
  for (auto& row : rows) {
    std::size_t keep = std::min(row.size(), ceil_count(fraction, row.size()));
    for (std::size_t i = 0; i < keep; ++i) out.checkins.push_back(row[i]);
  }
  return out;
}

std::uint32_t InteractionMatrix::count(std::uint32_t u, std::uint32_t p) const {
  auto r = row(u);
  auto it = std::lower_bound(r.begin(), r.end(), p,
                             [](const Entry& e, std::uint32_t key) { return e.poi < key; });
  if (it != r.end() && it->poi == p) return it->count;
  return 0;
}

std::uint64_t InteractionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto& e : entries_) sum += e.count;
  return sum;
}

InteractionMatrix build_interaction_matrix(const Dataset& d) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(d.checkins.size());
  for (const auto& c : d.checkins) pairs.emplace_back(c.user, c.poi);
  std::sort(pairs.begin(), pairs.end());

  std::vector<std::size_t> row_ptr(d.user_count() + 1, 0);
  std::vector<InteractionMatrix::Entry> entries;
  std::size_t i = 0;
  for (std::uint32_t u = 0; u < d.user_count(); ++u) {
    row_ptr[u] = entries.size();
    while (i < pairs.size() && pairs[i].first == u) {
      std::uint32_t p = pairs[i].second;
      std::uint32_t c = 0;
      while (i < pairs.size() && pairs[i].first == u && pairs[i].second == p) {
        ++c;
        ++i;
      }
      entries.push_back({p, c});
    }
  }
  row_ptr[d.user_count()] = entries.size();
  return InteractionMatrix(d.user_count(), d.poi_count(), std::move(row_ptr),
                           std::move(entries));
}

std::uint64_t dataset_fingerprint(const Dataset& d) {
  std::uint64_t h = kFnvOffset;
  h = fnv1a64_u64(d.user_count(), h);
  for (const auto& u : d.users) h = fnv1a64(u, fnv1a64("\x1f", h));
  h = fnv1a64_u64(d.poi_count(), h);
  for (const auto& p : d.pois) {
    h = fnv1a64(p.poi_id, fnv1a64("\x1f", h));
    h = fnv1a64_double(p.lat, h);
    h = fnv1a64_double(p.lon, h);
  }
  h = fnv1a64_u64(d.checkins.size(), h);
  for (const auto& c : d.checkins) {
    h = fnv1a64_u64(c.user, h);
    h = fnv1a64_u64(c.poi, h);
    h = fnv1a64_u64(c.timestamp ? static_cast<std::uint64_t>(*c.timestamp) + 1 : 0, h);
  }
  return h;
}

void write_checkins_tsv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::io, "cannot write check-in file: " + path);
  auto rows = per_user_sorted(d);
  for (std::uint32_t u = 0; u < d.user_count(); ++u) {
    for (const auto& c : rows[u]) {
      out << d.users[u] << '\t' << d.pois[c.poi].poi_id << '\t'
          << (c.timestamp ? format_timestamp(*c.timestamp) : "-") << '\n';
    }
  }
  if (!out) raise(ErrorCode::io, "write error: " + path);
}

void write_pois_tsv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::io, "cannot write POI file: " + path);
  char buf[96];
  for (const auto& p : d.pois) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g", p.lat, p.lon);
    out << p.poi_id << '\t' << buf << '\n';
  }
  if (!out) raise(ErrorCode::io, "write error: " + path);
}

Dataset load_canonical_dataset(const std::string& checkins_path, const std::string& pois_path) {
  auto pois = parse_poi_coords_file(pois_path);
  auto checkins = parse_checkins_file(checkins_path, Layout{0, 1, 2});
  return assemble_dataset(checkins, pois);
}

Dataset bind_checkins_to_space(const Dataset& space, const std::string& checkins_path) {
  std::unordered_map<std::string_view, std::uint32_t> user_index;
  std::unordered_map<std::string_view, std::uint32_t> poi_index;
  user_index.reserve(space.users.size());
  poi_index.reserve(space.pois.size());
  for (std::uint32_t u = 0; u < space.user_count(); ++u) user_index.emplace(space.users[u], u);
  for (std::uint32_t p = 0; p < space.poi_count(); ++p)
    poi_index.emplace(space.pois[p].poi_id, p);

  Dataset out;
  out.users = space.users;
  out.pois = space.pois;
  auto checkins = parse_checkins_file(checkins_path, Layout{0, 1, 2});
  std::uint64_t seq = 0;
  for (const auto& rec : checkins) {
    auto uit = user_index.find(rec.user_id);
    auto pit = poi_index.find(rec.poi_id);
    if (uit == user_index.end() || pit == poi_index.end())
      raise(ErrorCode::format, "check-in references id outside the dataset index space: " +
                                   rec.user_id + " / " + rec.poi_id + " in " + checkins_path);
    out.checkins.push_back(Interaction{uit->second, pit->second, rec.timestamp, seq++});
  }
  return out;
}

}  // namespace lglmf
