#include "mpfmfd/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mpfmfd/error.hpp"

namespace mpfmfd {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::optional<Index> parse_index(std::string_view text) {
  Index v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return v;
}

std::string row_context(std::size_t line_no) { return "line " + std::to_string(line_no); }

}  // namespace

IndexRange intersect(const IndexRange& a, const IndexRange& b) noexcept {
  return {std::max(a.begin, b.begin), std::min(a.end, b.end)};
}

std::string_view channel_name(Channel channel) noexcept { return channel == Channel::C ? "C" : "G"; }

double IndexedSeries::at(Index t) const {
  if (!range().contains(t)) fail(ErrorCode::OutOfRange, "index " + std::to_string(t) + " outside series");
  return values[static_cast<std::size_t>(t - start)];
}

IndexedSeries IndexedSeries::restrict_to(const IndexRange& r) const {
  const IndexRange common = intersect(range(), r);
  IndexedSeries out;
  if (common.empty()) {
    out.start = r.begin;
    return out;
  }
  out.start = common.begin;
  const auto first = values.begin() + (common.begin - start);
  out.values.assign(first, first + common.size());
  return out;
}

SeriesPair::SeriesPair(std::string name, std::vector<Record> records,
                       std::optional<std::vector<bool>> fault_mask)
    : name_(std::move(name)), records_(std::move(records)), fault_mask_(std::move(fault_mask)) {
  if (records_.empty()) fail(ErrorCode::SeriesTooShort, "series '" + name_ + "' has no records");
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].t != records_[i - 1].t + 1) {
      fail(ErrorCode::IndexGap, "index jumps from " + std::to_string(records_[i - 1].t) + " to " +
                                    std::to_string(records_[i].t));
    }
  }
  if (fault_mask_ && fault_mask_->size() != records_.size()) {
    fail(ErrorCode::InvalidSpec, "fault mask length does not match series length");
  }
}

const Record& SeriesPair::at(Index t) const {
  if (!range().contains(t)) fail(ErrorCode::OutOfRange, "index " + std::to_string(t) + " outside series");
  return records_[static_cast<std::size_t>(t - first_index())];
}

double SeriesPair::value(Channel channel, Index t) const {
  const Record& r = at(t);
  return channel == Channel::C ? r.c : r.g;
}

IndexedSeries SeriesPair::channel(Channel channel) const {
  IndexedSeries out;
  out.start = first_index();
  out.values.reserve(records_.size());
  for (const Record& r : records_) out.values.push_back(channel == Channel::C ? r.c : r.g);
  return out;
}

SeriesPair SeriesPair::with_channel(Channel channel, const std::vector<double>& values,
                                    std::optional<std::vector<bool>> fault_mask) const {
  if (values.size() != records_.size()) fail(ErrorCode::InvalidSpec, "channel length mismatch");
  std::vector<Record> records = records_;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (channel == Channel::C ? records[i].c : records[i].g) = values[i];
  }
  return SeriesPair(name_, std::move(records), std::move(fault_mask));
}

SeriesPair SeriesPair::slice(const IndexRange& r) const {
  const IndexRange common = intersect(range(), r);
  if (common.empty() || common != r) {
    fail(ErrorCode::OutOfRange, "slice [" + std::to_string(r.begin) + ", " + std::to_string(r.end) +
                                    ") outside series");
  }
  const auto offset = static_cast<std::size_t>(r.begin - first_index());
  const auto count = static_cast<std::size_t>(r.size());
  std::vector<Record> records(records_.begin() + offset, records_.begin() + offset + count);
  std::optional<std::vector<bool>> mask;
  if (fault_mask_) mask.emplace(fault_mask_->begin() + offset, fault_mask_->begin() + offset + count);
  return SeriesPair(name_, std::move(records), std::move(mask));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  // from_chars rejects a leading '+', which we accept for hand-written files.
  if (text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

SeriesPair parse_csv(std::string_view text, std::string name, const LoadOptions& options) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t nl = text.find('\n', pos);
    line = nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) fail(ErrorCode::MalformedRow, "missing header row");
  bool with_fault = false;
  if (line == "t,c,g,fault") {
    with_fault = true;
  } else if (line != "t,c,g") {
    fail(ErrorCode::MalformedRow, "expected header 't,c,g' or 't,c,g,fault'");
  }
  const std::size_t expected_fields = with_fault ? 4 : 3;

  std::vector<Record> records;
  std::vector<bool> mask;
  while (next_line(line)) {
    if (line.empty() && pos >= text.size()) break;  // trailing newline
    const auto fields = split_fields(line);
    if (fields.size() != expected_fields) {
      fail(ErrorCode::MalformedRow, row_context(line_no) + ": expected " + std::to_string(expected_fields) +
                                        " fields");
    }
    const auto t = parse_index(fields[0]);
    const auto c = parse_double(fields[1]);
    const auto g = parse_double(fields[2]);
    if (!t || !c || !g) fail(ErrorCode::MalformedRow, row_context(line_no) + ": non-numeric field");
    if (options.require_finite && (!std::isfinite(*c) || !std::isfinite(*g))) {
      fail(ErrorCode::NonFinite, row_context(line_no) + ": non-finite value");
    }
    if (!records.empty() && *t != records.back().t + 1) {
      fail(ErrorCode::IndexGap, row_context(line_no) + ": index " + std::to_string(*t) + " follows " +
                                    std::to_string(records.back().t));
    }
    records.push_back({*t, *c, *g});
    if (with_fault) {
      if (fields[3] == "0") {
        mask.push_back(false);
      } else if (fields[3] == "1") {
        mask.push_back(true);
      } else {
        fail(ErrorCode::MalformedRow, row_context(line_no) + ": fault column must be 0 or 1");
      }
    }
  }
  if (records.empty()) fail(ErrorCode::SeriesTooShort, "no data rows");
  std::optional<std::vector<bool>> fault_mask;
  if (with_fault) fault_mask = std::move(mask);
  return SeriesPair(std::move(name), std::move(records), std::move(fault_mask));
}

SeriesPair load_csv(const std::filesystem::path& path, const LoadOptions& options) {
  return parse_csv(read_text_file(path), path.stem().string(), options);
}

std::string format_csv(const SeriesPair& series) {
  std::string out;
  out.reserve(series.size() * 32 + 16);
  const auto& mask = series.fault_mask();
  out += mask ? "t,c,g,fault\n" : "t,c,g\n";
  const auto& records = series.records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    out += std::to_string(records[i].t);
    out += ',';
    out += format_double(records[i].c);
    out += ',';
    out += format_double(records[i].g);
    if (mask) out += (*mask)[i] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

void emit_csv(const SeriesPair& series, const std::filesystem::path& path) {
  write_text_file(path, format_csv(series));
}

std::vector<double> window(const SeriesPair& series, Channel channel, Index t, Index n) {
  if (n < 0) fail(ErrorCode::OutOfRange, "negative window length");
  if (t - n < series.first_index() || !series.range().contains(t)) {
    fail(ErrorCode::OutOfRange, "window [" + std::to_string(t - n) + ", " + std::to_string(t) +
                                    "] outside series");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (Index i = t - n; i <= t; ++i) out.push_back(series.value(channel, i));
  return out;
}

void validate_split(const SeriesPair& series, const SplitSpec& spec) {
  const IndexRange bounds = series.range();
  for (const IndexRange* r : {&spec.train, &spec.calibrate, &spec.test}) {
    if (r->empty()) fail(ErrorCode::InvalidSplit, "split ranges must be non-empty");
    if (r->begin < bounds.begin || r->end > bounds.end) {
      fail(ErrorCode::InvalidSplit, "range [" + std::to_string(r->begin) + ", " + std::to_string(r->end) +
                                        ") outside series bounds");
    }
  }
  if (spec.train.end > spec.calibrate.begin || spec.calibrate.end > spec.test.begin) {
    fail(ErrorCode::InvalidSplit, "ranges overlap or are out of order (train < calibrate < test)");
  }
}

SplitParts split(const SeriesPair& series, const SplitSpec& spec) {
  validate_split(series, spec);
  return {series.slice(spec.train), series.slice(spec.calibrate), series.slice(spec.test)};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace mpfmfd
