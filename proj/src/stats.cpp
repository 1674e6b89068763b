#include "geezmt/stats.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "geezmt/corpus.hpp"
#include "geezmt/error.hpp"

namespace geezmt {

namespace {

constexpr std::array<std::string_view, 9> kColumns = {
    "Direction", "Domain", "Original", "Duplicates removed", "train",
    "test",      "validation", "Total", "Consistency"};

}  // namespace

std::size_t StatsTable::direction_total(const std::string& direction) const {
  std::size_t total = 0;
  for (const auto& r : rows_) {
    if (r.direction == direction) total += r.after_dedup;
  }
  return total;
}

std::string StatsTable::to_tsv() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < kColumns.size(); ++c) out << (c ? "\t" : "") << kColumns[c];
  out << '\n';
  for (const auto& r : rows_) {
    out << r.direction << '\t' << r.domain << '\t' << r.original << '\t' << r.after_dedup << '\t'
        << r.train << '\t' << r.test << '\t' << r.validation << '\t' << r.split_sum() << '\t'
        << (r.consistent() ? "OK" : "FAIL") << '\n';
  }
  return out.str();
}

std::string StatsTable::to_text() const {
  std::vector<std::array<std::string, kColumns.size()>> cells;
  cells.push_back({});
  for (std::size_t c = 0; c < kColumns.size(); ++c) cells[0][c] = std::string(kColumns[c]);
  std::string previous;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    const bool first = i == 0 || r.direction != previous;
    previous = r.direction;
    cells.push_back({first ? r.direction : "", r.domain, std::to_string(r.original),
                     std::to_string(r.after_dedup), std::to_string(r.train),
                     std::to_string(r.test), std::to_string(r.validation),
                     first ? std::to_string(direction_total(r.direction)) : "",
                     r.consistent() ? "OK" : "FAIL"});
  }
  std::array<std::size_t, kColumns.size()> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      // Text columns left-aligned, counts right-aligned.
      const std::size_t pad = width[c] - row[c].size();
      if (c < 2 || c == row.size() - 1) {
        line += row[c] + std::string(pad, ' ');
      } else {
        line += std::string(pad, ' ') + row[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

StatsTable StatsTable::from_tsv(std::string_view tsv) {
  StatsTable table;
  const auto lines = split_lines(tsv);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = lines[i].find('\t', start);
      f.push_back(lines[i].substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() < 7) throw FormatError("expected at least 7 tab-separated fields", i + 1);
    StatsRow row;
    row.direction = f[0];
    row.domain = f[1];
    try {
      row.original = std::stoull(f[2]);
      row.after_dedup = std::stoull(f[3]);
      row.train = std::stoull(f[4]);
      row.test = std::stoull(f[5]);
      row.validation = std::stoull(f[6]);
    } catch (const std::exception&) {
      throw FormatError("non-numeric count", i + 1);
    }
    table.add_row(std::move(row));
  }
  return table;
}

StatsTable stats_report(std::span<const SplitBundle> bundles) {
  StatsTable table;
  for (const auto& b : bundles) {
    for (const auto& [domain, c] : b.report.domains) {
      table.add_row(StatsRow{b.direction().str(), domain, c.original, c.kept(), c.train, c.test,
                             c.validation});
    }
  }
  return table;
}

}  // namespace geezmt
