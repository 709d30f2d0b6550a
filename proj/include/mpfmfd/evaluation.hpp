#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpfmfd/forecasters.hpp"
#include "mpfmfd/residue_alarm.hpp"

namespace mpfmfd {

// Mean squared residue over the overlap of the two ranges.
double mse(const IndexedSeries& actual, const IndexedSeries& forecast);

struct ComparisonRow {
  std::string model_name;
  double mse = 0.0;
  IndexRange test_range;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

struct NamedModel {
  std::string name;
  const TrainedModel* model = nullptr;
};

// Every model is scored on the intersection of its feasible range with
// test_range and with all other models' feasible ranges.
ComparisonReport compare_models(const SeriesPair& pair, std::span<const NamedModel> models, IndexRange test_range);

struct DetectionReport {
  Index fault_start = 0;
  std::optional<Index> first_alarm;
  std::optional<Index> latency;
  TriggerSet triggers_seen;
  Index false_alarms_prefault = 0;

  friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

// `mask` is indexed from `mask_start`. The fault starts at the first true
// entry; false alarms are counted in [warmup, fault_start).
DetectionReport detection_report(std::span<const AlarmEvent> events, const std::vector<bool>& mask, Index mask_start,
                                 Index warmup);

// Range columns are half-open: range_end is the first index not scored.
std::string format_comparison_csv(const ComparisonReport& report);
std::string format_detection_csv(const DetectionReport& report);

struct TraceInputs {
  const IndexedSeries* actual = nullptr;
  const IndexedSeries* forecast = nullptr;
  const ResidueSeries* residue = nullptr;
  const ResidueStats* stats = nullptr;
  const Thresholds* thresholds = nullptr;
  std::span<const AlarmEvent> alarms;
};

// One row per residue index; statistic cells are empty before the first full window.
std::string format_trace_csv(const TraceInputs& trace);

void emit_report(const ComparisonReport& report, const std::filesystem::path& path);
void emit_report(const DetectionReport& report, const std::filesystem::path& path);

}  // namespace mpfmfd
