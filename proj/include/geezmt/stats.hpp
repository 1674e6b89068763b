#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geezmt/dedup_split.hpp"

namespace geezmt {

struct StatsRow {
  std::string direction;
  std::string domain;
  std::size_t original = 0;
  std::size_t after_dedup = 0;  // after duplicate and overlap removal
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t validation = 0;

  std::size_t split_sum() const noexcept { return train + test + validation; }
  // The split sizes add up to the kept count, which cannot exceed the
  // original count.
  bool consistent() const noexcept {
    return split_sum() == after_dedup && after_dedup <= original;
  }
};

class StatsTable {
public:
  void add_row(StatsRow row) { rows_.push_back(std::move(row)); }
  const std::vector<StatsRow>& rows() const noexcept { return rows_; }

  // Sum of after_dedup over every row sharing `direction`.
  std::size_t direction_total(const std::string& direction) const;

  // Tab-separated, one line per row, each row fully populated.
  std::string to_tsv() const;
  // Column-aligned text: direction and Total printed on the first row of
  // each direction group only.
  std::string to_text() const;

  static StatsTable from_tsv(std::string_view tsv);

private:
  std::vector<StatsRow> rows_;
};

StatsTable stats_report(std::span<const SplitBundle> bundles);

}  // namespace geezmt
