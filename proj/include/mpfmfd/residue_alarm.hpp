#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mpfmfd/timeseries.hpp"

namespace mpfmfd {

// r(t) = y(t) - ŷ(t), stored from `start`.
using ResidueSeries = IndexedSeries;

ResidueSeries residue(const IndexedSeries& actual, const IndexedSeries& forecast);

// Trailing-window statistics. Entry i describes the window ending at
// index start + i, i.e. residues [start + i - w + 1, start + i].
struct ResidueStats {
  int window_w = 0;
  Index start = 0;
  std::vector<double> mean_stat;  // |mean of r over the window|
  std::vector<double> std_stat;   // population sd of r over the window

  std::size_t size() const noexcept { return mean_stat.size(); }
  IndexRange range() const noexcept { return {start, start + static_cast<Index>(mean_stat.size())}; }
};

// Each window is summed independently with compensated summation, so a
// value depends only on the residues inside its window.
ResidueStats rolling_stats(const ResidueSeries& res, int window_w);

struct Thresholds {
  double mean_thr = 0.0;
  double std_thr = 0.0;
  double safety_factor = 1.0;
  int window_w = 0;
  IndexRange calibration_range;  // residue indices the maxima were taken over

  friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

Thresholds calibrate(const ResidueStats& stats, double safety_factor);

enum class Trigger { Mean, Std, Both };

std::string_view trigger_name(Trigger trigger) noexcept;

struct AlarmEvent {
  Index t = 0;
  Trigger trigger = Trigger::Mean;
  double mean_value = 0.0;
  double std_value = 0.0;

  friend bool operator==(const AlarmEvent&, const AlarmEvent&) = default;
};

// Strictly-greater comparison against each threshold.
std::vector<AlarmEvent> detect(const ResidueStats& stats, const Thresholds& thresholds);

struct TriggerSet {
  bool mean = false;
  bool std = false;

  void add(Trigger trigger) noexcept;
  bool empty() const noexcept { return !mean && !std; }
  std::string to_string() const;  // "", "mean", "std", "mean|std"

  friend bool operator==(const TriggerSet&, const TriggerSet&) = default;
};

struct AlarmEpisode {
  Index start = 0;
  Index end = 0;  // inclusive
  TriggerSet triggers;

  friend bool operator==(const AlarmEpisode&, const AlarmEpisode&) = default;
};

std::vector<AlarmEpisode> merge_episodes(std::span<const AlarmEvent> events, Index gap);

inline constexpr int kThresholdsFormatVersion = 1;

std::string format_thresholds(const Thresholds& thresholds);
Thresholds parse_thresholds(std::string_view text);
void save_thresholds(const Thresholds& thresholds, const std::filesystem::path& path);
Thresholds load_thresholds(const std::filesystem::path& path);

// `t,trigger,mean_value,std_value,mean_thr,std_thr`
std::string format_alarms_csv(std::span<const AlarmEvent> events, const Thresholds& thresholds);

// `start,end,triggers`, end inclusive.
std::string format_episodes_csv(std::span<const AlarmEpisode> episodes);

}  // namespace mpfmfd
