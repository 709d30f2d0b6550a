#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mpfmfd/tcn.hpp"
#include "mpfmfd/timeseries.hpp"

namespace mpfmfd {

enum class TcnMode {
  Endogenous,  // G history -> G
  Exogenous,   // C history -> G
};

struct NaiveKind {
  friend bool operator==(const NaiveKind&, const NaiveKind&) = default;
};

// Forecast y(t+1) = c(t+1-lag_m). With lag_m = 0 this reads the same-tick C
// sample, which is only causal if C is available before G is forecast.
struct HardSubtractionKind {
  Index lag_m = 0;
  friend bool operator==(const HardSubtractionKind&, const HardSubtractionKind&) = default;
};

struct TcnKind {
  TcnConfig config;
  TcnMode mode = TcnMode::Exogenous;
  friend bool operator==(const TcnKind&, const TcnKind&) = default;
};

using ForecasterKind = std::variant<NaiveKind, HardSubtractionKind, TcnKind>;

std::string kind_label(const ForecasterKind& kind);

struct ChannelStats {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

// z-score statistics of the training data. A constant channel gets sd = 1.
struct Normalization {
  ChannelStats c;
  ChannelStats g;
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

Normalization fit_normalization(const SeriesPair& train);

inline constexpr int kModelFormatVersion = 1;

struct TrainedModel {
  ForecasterKind kind;
  std::vector<double> parameters;  // TcnArchitecture layout; empty otherwise
  Normalization normalization;
  std::vector<double> training_loss_history;
  int format_version = kModelFormatVersion;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

double naive_forecast(std::span<const double> history);

// argmax over lag in [0, max_lag] of the Pearson correlation of c(t-lag)
// with g(t); ties go to the smallest lag.
Index estimate_lag(const SeriesPair& pair, Index max_lag);

// c(t + 1 - lag_m)
double hard_subtraction_forecast(const SeriesPair& pair, Index t, Index lag_m);

// ŷ(t+1) from the raw (un-normalized) input window of n+1 values.
double tcn_forward(const TrainedModel& model, std::span<const double> input_window);

TrainedModel tcn_train(const SeriesPair& train, const TcnKind& kind);

// Builds a model of any kind from training data (only TCN actually learns).
TrainedModel fit_model(const SeriesPair& train, const ForecasterKind& kind);

// Indices t+1 for which `model` can forecast on `pair`.
IndexRange feasible_range(const TrainedModel& model, const SeriesPair& pair);

// One forecast per feasible t+1, stored at index t+1.
IndexedSeries forecast_series(const TrainedModel& model, const SeriesPair& pair);
// Same, limited to forecasts stored at indices inside `range`.
IndexedSeries forecast_series(const TrainedModel& model, const SeriesPair& pair, IndexRange range);

std::string format_model(const TrainedModel& model);
TrainedModel parse_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace mpfmfd
