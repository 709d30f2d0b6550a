#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mpfmfd/evaluation.hpp"
#include "mpfmfd/forecasters.hpp"
#include "mpfmfd/residue_alarm.hpp"
#include "mpfmfd/run_config.hpp"

namespace mpfmfd {

// Model names accepted by train_forecaster, in report order.
const std::vector<std::string>& model_names();

// Fits `name` (naive, hardsub, tcn-endo, tcn-exo) on the split.train slice.
TrainedModel train_forecaster(const SeriesPair& series, const RunConfig& config, const std::string& name);

struct ResidueAnalysis {
  IndexedSeries actual;
  IndexedSeries forecast;
  ResidueSeries residue;
  ResidueStats stats;
};

// Residues of `model` restricted to `range`, then rolling statistics over
// them. Detection and calibration both go through here, so calibrating and
// detecting on the same range see identical statistics.
ResidueAnalysis analyze(const TrainedModel& model, const SeriesPair& series, IndexRange range, int window_w);

Thresholds calibrate_model(const TrainedModel& model, const SeriesPair& series, const RunConfig& config);

struct Detection {
  ResidueAnalysis analysis;
  std::vector<AlarmEvent> events;
};

Detection detect_range(const TrainedModel& model, const SeriesPair& series, const Thresholds& thresholds,
                       IndexRange range);

struct E2eResult {
  bool alarm_fired = false;
  ComparisonReport comparison;
  Thresholds thresholds;
  std::vector<AlarmEvent> events;
  std::optional<DetectionReport> detection;
};

// simulate -> inject (if fault.kind != none) -> train all four models ->
// compare on split.test of the clean series -> calibrate alarm.model ->
// detect on split.test of the faulted series. Writes data.csv, model-*.json,
// comparison.csv, thresholds.json, alarms.csv, episodes.csv (merged with
// alarm.merge_gap), trace.csv and, with a fault,
// detection.csv into `out_dir`.
E2eResult run_e2e(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace mpfmfd
