#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lglmf {

// One raw check-in event as parsed from an input file.
struct CheckIn {
  std::string user_id;
  std::string poi_id;
  std::optional<std::int64_t> timestamp;  // seconds since the Unix epoch, UTC
};

struct Poi {
  std::string poi_id;
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

// A check-in bound to dense dataset indices. `seq` is the position of the
// record in the source file and acts as the final ordering tie-break.
struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t poi = 0;
  std::optional<std::int64_t> timestamp;
  std::uint64_t seq = 0;
};

// Users and POIs carry dense contiguous indices given by their position in
// `users` / `pois`. Every Interaction references valid indices. Splits of a
// dataset keep the full index tables so factor matrices stay aligned.
struct Dataset {
  std::vector<std::string> users;
  std::vector<Poi> pois;
  std::vector<Interaction> checkins;

  std::uint32_t user_count() const { return static_cast<std::uint32_t>(users.size()); }
  std::uint32_t poi_count() const { return static_cast<std::uint32_t>(pois.size()); }
};

// Sparse user x POI check-in frequency counts, CSR over users.
class InteractionMatrix {
public:
  struct Entry {
    std::uint32_t poi = 0;
    std::uint32_t count = 0;
  };

  InteractionMatrix() = default;
  InteractionMatrix(std::uint32_t rows, std::uint32_t cols,
                    std::vector<std::size_t> row_ptr, std::vector<Entry> entries)
      : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), entries_(std::move(entries)) {}

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }

  std::span<const Entry> row(std::uint32_t u) const {
    return {entries_.data() + row_ptr_[u], entries_.data() + row_ptr_[u + 1]};
  }

  // 0 when the pair is absent.
  std::uint32_t count(std::uint32_t u, std::uint32_t p) const;

  std::size_t nnz() const { return entries_.size(); }
  std::uint64_t total() const;

private:
  std::uint32_t rows_ = 0;
  std::uint32_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Entry> entries_;
};

struct SplitSpec {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;

  void validate() const;  // fractions in range, sum to 1 within 1e-9
};

}  // namespace lglmf
