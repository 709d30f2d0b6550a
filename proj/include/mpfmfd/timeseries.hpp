#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mpfmfd {

using Index = std::int64_t;

// Half-open range of sample indices [begin, end).
struct IndexRange {
  Index begin = 0;
  Index end = 0;

  Index size() const noexcept { return end > begin ? end - begin : 0; }
  bool empty() const noexcept { return end <= begin; }
  bool contains(Index t) const noexcept { return t >= begin && t < end; }

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

IndexRange intersect(const IndexRange& a, const IndexRange& b) noexcept;

struct Record {
  Index t = 0;
  double c = 0.0;
  double g = 0.0;

  friend bool operator==(const Record&, const Record&) = default;
};

enum class Channel { C, G };

std::string_view channel_name(Channel channel) noexcept;

// A run of values on consecutive indices starting at `start`. Used for
// single-channel slices, forecasts and residues alike.
struct IndexedSeries {
  Index start = 0;
  std::vector<double> values;

  IndexRange range() const noexcept { return {start, start + static_cast<Index>(values.size())}; }
  bool empty() const noexcept { return values.empty(); }
  double at(Index t) const;
  // Copy of the part of this series inside `r` (possibly empty).
  IndexedSeries restrict_to(const IndexRange& r) const;
};

// Paired C/G samples on a uniform integer index. Immutable once built;
// the constructor enforces the index invariant.
class SeriesPair {
 public:
  SeriesPair(std::string name, std::vector<Record> records,
             std::optional<std::vector<bool>> fault_mask = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Record>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  Index first_index() const noexcept { return records_.front().t; }
  IndexRange range() const noexcept {
    return {first_index(), first_index() + static_cast<Index>(records_.size())};
  }

  const Record& at(Index t) const;
  double value(Channel channel, Index t) const;
  IndexedSeries channel(Channel channel) const;

  bool has_fault_mask() const noexcept { return fault_mask_.has_value(); }
  const std::optional<std::vector<bool>>& fault_mask() const noexcept { return fault_mask_; }

  // Same indices, one channel replaced. `values` must match size().
  SeriesPair with_channel(Channel channel, const std::vector<double>& values,
                          std::optional<std::vector<bool>> fault_mask) const;
  SeriesPair slice(const IndexRange& r) const;

  friend bool operator==(const SeriesPair&, const SeriesPair&) = default;

 private:
  std::string name_;
  std::vector<Record> records_;
  std::optional<std::vector<bool>> fault_mask_;
};

struct LoadOptions {
  // Reject NaN/Inf values (clean-data mode).
  bool require_finite = true;
};

SeriesPair parse_csv(std::string_view text, std::string name, const LoadOptions& options = {});
SeriesPair load_csv(const std::filesystem::path& path, const LoadOptions& options = {});

// Canonical text: header `t,c,g[,fault]`, LF endings, shortest round-trip decimals.
std::string format_csv(const SeriesPair& series);
void emit_csv(const SeriesPair& series, const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view text);

// Values of `channel` at t-n ... t (oldest first, n+1 values).
std::vector<double> window(const SeriesPair& series, Channel channel, Index t, Index n);

struct SplitSpec {
  IndexRange train;
  IndexRange calibrate;
  IndexRange test;
};

struct SplitParts {
  SeriesPair train;
  SeriesPair calibrate;
  SeriesPair test;
};

void validate_split(const SeriesPair& series, const SplitSpec& spec);
SplitParts split(const SeriesPair& series, const SplitSpec& spec);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace mpfmfd
