#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "types.hpp"

namespace lglmf {

// Column positions of the user, POI and optional timestamp fields in a
// tab-separated check-in file. -1 means the file carries no timestamp.
struct Layout {
  int user_col = 0;
  int poi_col = 1;
  int time_col = 2;

  void validate() const;
  std::string to_string() const;
};

// Parses "0,1,2" or "0,1,-" style descriptors.
Layout parse_layout(std::string_view text);

struct ParseStats {
  std::uint64_t lines = 0;      // non-comment, non-blank lines seen
  std::uint64_t parsed = 0;
  std::uint64_t malformed = 0;
  std::uint64_t comments = 0;
};

// Accepts "YYYY-MM-DDTHH:MM:SSZ" or plain integer epoch seconds.
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t epoch_seconds);

// One CheckIn per well-formed line, input order preserved. Lines starting
// with '#' are ignored. Throws a format error when more than half of the
// lines are malformed (wrong layout descriptor), an io error when the
// source cannot be read.
std::vector<CheckIn> parse_checkins(std::istream& in, const Layout& layout,
                                    ParseStats* stats = nullptr);
std::vector<CheckIn> parse_checkins_file(const std::string& path, const Layout& layout,
                                         ParseStats* stats = nullptr);

struct PoiParseStats {
  std::uint64_t lines = 0;
  std::uint64_t parsed = 0;
  std::uint64_t duplicates = 0;  // repeated poi_id, first occurrence kept
  std::uint64_t rejected = 0;    // out-of-bounds coordinates or malformed
  std::uint64_t comments = 0;
};

// "poi_id<TAB>lat<TAB>lon" per line; first occurrence of an id wins.
std::vector<Poi> parse_poi_coords(std::istream& in, PoiParseStats* stats = nullptr);
std::vector<Poi> parse_poi_coords_file(const std::string& path, PoiParseStats* stats = nullptr);

struct AssembleStats {
  std::uint64_t dropped_unknown_poi = 0;  // check-ins whose POI has no coordinates
};

// Builds the dense index space: users by first appearance in the check-in
// stream, POIs by first appearance restricted to POIs with known coordinates.
Dataset assemble_dataset(const std::vector<CheckIn>& checkins, const std::vector<Poi>& pois,
                         AssembleStats* stats = nullptr);

// Iterates removal of users with fewer than min_user_pois distinct POIs and
// POIs with fewer than min_poi_visitors distinct visitors until a fixed
// point, then re-densifies indices. Degenerate-dataset error when nothing
// survives.
Dataset filter_dataset(const Dataset& d, std::uint32_t min_user_pois,
                       std::uint32_t min_poi_visitors);

struct SplitResult {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// Per user: check-ins sorted ascending by (timestamp, poi_id, file position);
// first ceil(train * n) go to train, last floor(test * n) to test, the rest to
// validation. Users with fewer than 3 check-ins raise a split error.
SplitResult temporal_split(const Dataset& d, const SplitSpec& spec);

// Keeps the earliest ceil(fraction * n_u) training check-ins per user.
Dataset subsample_training(const Dataset& train, double fraction);

InteractionMatrix build_interaction_matrix(const Dataset& d);

// Content fingerprint over ids, coordinates and check-ins; stable across runs.
std::uint64_t dataset_fingerprint(const Dataset& d);

// Canonical on-disk form: check-ins as "user<TAB>poi<TAB>timestamp" ('-' when
// absent) grouped by user index in temporal order; POIs one per line in index
// order. Reloading reproduces the identical index space.
void write_checkins_tsv(const Dataset& d, const std::string& path);
void write_pois_tsv(const Dataset& d, const std::string& path);
Dataset load_canonical_dataset(const std::string& checkins_path, const std::string& pois_path);

// Reads a check-in file written by write_checkins_tsv and binds the events to
// an existing dataset's index space (used to reload split parts).
Dataset bind_checkins_to_space(const Dataset& space, const std::string& checkins_path);

}  // namespace lglmf
