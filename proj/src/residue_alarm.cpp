#include "mpfmfd/residue_alarm.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "mpfmfd/error.hpp"

namespace mpfmfd {
namespace {

using Json = nlohmann::ordered_json;

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

ResidueSeries residue(const IndexedSeries& actual, const IndexedSeries& forecast) {
  const IndexRange common = intersect(actual.range(), forecast.range());
  if (common.empty()) fail(ErrorCode::NoOverlap, "actual and forecast index ranges do not overlap");
  ResidueSeries out;
  out.start = common.begin;
  out.values.reserve(static_cast<std::size_t>(common.size()));
  for (Index t = common.begin; t < common.end; ++t) out.values.push_back(actual.at(t) - forecast.at(t));
  return out;
}

ResidueStats rolling_stats(const ResidueSeries& res, int window_w) {
  if (window_w < 2) fail(ErrorCode::WindowTooSmall, "window_w must be >= 2");
  const auto w = static_cast<std::size_t>(window_w);
  if (res.values.size() < w) {
    fail(ErrorCode::WindowTooLarge, "window of " + std::to_string(w) + " exceeds " +
                                        std::to_string(res.values.size()) + " residues");
  }
  ResidueStats stats;
  stats.window_w = window_w;
  stats.start = res.start + window_w - 1;
  const std::size_t count = res.values.size() - w + 1;
  stats.mean_stat.resize(count);
  stats.std_stat.resize(count);
  const double inv_w = 1.0 / static_cast<double>(w);
  for (std::size_t i = 0; i < count; ++i) {
    const double* r = res.values.data() + i;
    CompensatedSum sum;
    for (std::size_t j = 0; j < w; ++j) sum.add(r[j]);
    const double mean = sum.value() * inv_w;
    CompensatedSum squares;
    for (std::size_t j = 0; j < w; ++j) {
      const double d = r[j] - mean;
      squares.add(d * d);
    }
    stats.mean_stat[i] = std::abs(mean);
    stats.std_stat[i] = std::sqrt(squares.value() * inv_w);
  }
  return stats;
}

Thresholds calibrate(const ResidueStats& stats, double safety_factor) {
  if (stats.size() == 0) fail(ErrorCode::EmptyStats, "cannot calibrate on empty statistics");
  if (!(safety_factor >= 1.0) || !std::isfinite(safety_factor)) {
    fail(ErrorCode::InvalidConfig, "safety_factor must be a finite value >= 1");
  }
  Thresholds thr;
  thr.safety_factor = safety_factor;
  thr.window_w = stats.window_w;
  thr.mean_thr = safety_factor * *std::max_element(stats.mean_stat.begin(), stats.mean_stat.end());
  thr.std_thr = safety_factor * *std::max_element(stats.std_stat.begin(), stats.std_stat.end());
  thr.calibration_range = {stats.start - stats.window_w + 1, stats.range().end};
  return thr;
}

std::string_view trigger_name(Trigger trigger) noexcept {
  switch (trigger) {
    case Trigger::Mean: return "mean";
    case Trigger::Std: return "std";
    case Trigger::Both: return "both";
  }
  return "";
}

std::vector<AlarmEvent> detect(const ResidueStats& stats, const Thresholds& thresholds) {
  std::vector<AlarmEvent> events;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const bool mean_hit = stats.mean_stat[i] > thresholds.mean_thr;
    const bool std_hit = stats.std_stat[i] > thresholds.std_thr;
    if (!mean_hit && !std_hit) continue;
    const Trigger trigger = mean_hit && std_hit ? Trigger::Both : (mean_hit ? Trigger::Mean : Trigger::Std);
    events.push_back({stats.start + static_cast<Index>(i), trigger, stats.mean_stat[i], stats.std_stat[i]});
  }
  return events;
}

void TriggerSet::add(Trigger trigger) noexcept {
  if (trigger != Trigger::Std) mean = true;
  if (trigger != Trigger::Mean) std = true;
}

std::string TriggerSet::to_string() const {
  if (mean && std) return "mean|std";
  if (mean) return "mean";
  if (std) return "std";
  return "";
}

std::vector<AlarmEpisode> merge_episodes(std::span<const AlarmEvent> events, Index gap) {
  std::vector<AlarmEpisode> episodes;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0 && events[i].t < events[i - 1].t) {
      fail(ErrorCode::UnsortedEvents, "alarm events must be sorted by t");
    }
    const AlarmEvent& e = events[i];
    if (!episodes.empty() && e.t - episodes.back().end <= gap) {
      episodes.back().end = e.t;
      episodes.back().triggers.add(e.trigger);
    } else {
      AlarmEpisode ep{e.t, e.t, {}};
      ep.triggers.add(e.trigger);
      episodes.push_back(ep);
    }
  }
  return episodes;
}

std::string format_thresholds(const Thresholds& thresholds) {
  Json doc;
  doc["format"] = "mpfmfd-thresholds";
  doc["format_version"] = kThresholdsFormatVersion;
  doc["mean_thr"] = thresholds.mean_thr;
  doc["std_thr"] = thresholds.std_thr;
  doc["window_w"] = thresholds.window_w;
  doc["safety_factor"] = thresholds.safety_factor;
  doc["calibration_range"] = {thresholds.calibration_range.begin, thresholds.calibration_range.end};
  return doc.dump(1) + "\n";
}

Thresholds parse_thresholds(std::string_view text) {
  try {
    const Json doc = Json::parse(text);
    if (doc.value("format", std::string()) != "mpfmfd-thresholds") {
      fail(ErrorCode::CorruptFile, "not an mpfmfd thresholds file");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kThresholdsFormatVersion) {
      fail(ErrorCode::VersionMismatch, "thresholds format_version " + std::to_string(version));
    }
    Thresholds thr;
    thr.mean_thr = doc.at("mean_thr").get<double>();
    thr.std_thr = doc.at("std_thr").get<double>();
    thr.window_w = doc.at("window_w").get<int>();
    thr.safety_factor = doc.at("safety_factor").get<double>();
    const Json& range = doc.at("calibration_range");
    thr.calibration_range = {range.at(0).get<Index>(), range.at(1).get<Index>()};
    if (thr.window_w < 2 || !(thr.mean_thr >= 0.0) || !(thr.std_thr >= 0.0)) {
      fail(ErrorCode::CorruptFile, "thresholds out of range");
    }
    return thr;
  } catch (const Json::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("thresholds file unreadable: ") + e.what());
  }
}

void save_thresholds(const Thresholds& thresholds, const std::filesystem::path& path) {
  write_text_file(path, format_thresholds(thresholds));
}

Thresholds load_thresholds(const std::filesystem::path& path) { return parse_thresholds(read_text_file(path)); }

std::string format_alarms_csv(std::span<const AlarmEvent> events, const Thresholds& thresholds) {
  std::string out = "t,trigger,mean_value,std_value,mean_thr,std_thr\n";
  const std::string thr_cells = format_double(thresholds.mean_thr) + "," + format_double(thresholds.std_thr);
  for (const AlarmEvent& e : events) {
    out += std::to_string(e.t);
    out += ',';
    out += trigger_name(e.trigger);
    out += ',';
    out += format_double(e.mean_value);
    out += ',';
    out += format_double(e.std_value);
    out += ',';
    out += thr_cells;
    out += '\n';
  }
  return out;
}

std::string format_episodes_csv(std::span<const AlarmEpisode> episodes) {
  std::string out = "start,end,triggers\n";
  for (const AlarmEpisode& ep : episodes) {
    out += std::to_string(ep.start) + "," + std::to_string(ep.end) + "," + ep.triggers.to_string() + "\n";
  }
  return out;
}

}  // namespace mpfmfd
