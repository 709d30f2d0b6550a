#include "mpfmfd/pipeline.hpp"

#include <algorithm>

#include "mpfmfd/error.hpp"
#include "mpfmfd/fault_injection.hpp"
#include "mpfmfd/simulator.hpp"

namespace mpfmfd {

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"naive", "hardsub", "tcn-endo", "tcn-exo"};
  return names;
}

TrainedModel train_forecaster(const SeriesPair& series, const RunConfig& config, const std::string& name) {
  const SeriesPair train = series.slice(config.split.train);
  if (name == "naive") return fit_model(train, NaiveKind{});
  if (name == "hardsub") {
    const Index lag = config.hardsub_lag ? *config.hardsub_lag : estimate_lag(train, config.hardsub_max_lag);
    return fit_model(train, HardSubtractionKind{lag});
  }
  if (name == "tcn-endo") return fit_model(train, TcnKind{config.tcn_config(), TcnMode::Endogenous});
  if (name == "tcn-exo") return fit_model(train, TcnKind{config.tcn_config(), TcnMode::Exogenous});
  fail(ErrorCode::InvalidConfig, "unknown model '" + name + "'");
}

ResidueAnalysis analyze(const TrainedModel& model, const SeriesPair& series, IndexRange range, int window_w) {
  ResidueAnalysis a;
  const IndexRange usable = intersect(range, feasible_range(model, series));
  if (usable.empty()) fail(ErrorCode::SeriesTooShort, "no forecastable index in the requested range");
  a.forecast = forecast_series(model, series, usable);
  a.actual = series.channel(Channel::G).restrict_to(usable);
  a.residue = residue(a.actual, a.forecast);
  a.stats = rolling_stats(a.residue, window_w);
  return a;
}

Thresholds calibrate_model(const TrainedModel& model, const SeriesPair& series, const RunConfig& config) {
  const ResidueAnalysis a = analyze(model, series, config.split.calibrate, config.window_w);
  return calibrate(a.stats, config.safety_factor);
}

Detection detect_range(const TrainedModel& model, const SeriesPair& series, const Thresholds& thresholds,
                       IndexRange range) {
  Detection d{analyze(model, series, range, thresholds.window_w), {}};
  d.events = detect(d.analysis.stats, thresholds);
  return d;
}

E2eResult run_e2e(const RunConfig& config, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  const SeriesPair clean = generate(config.sim_config());
  validate_split(clean, config.split);
  const std::optional<FaultSpec> fault = config.fault_spec();
  std::optional<InjectionResult> injected;
  if (fault) injected = inject(clean, *fault);
  const SeriesPair& observed = injected ? injected->faulted : clean;
  emit_csv(observed, out_dir / "data.csv");

  std::vector<TrainedModel> models;
  for (const std::string& name : model_names()) {
    models.push_back(train_forecaster(clean, config, name));
    save_model(models.back(), out_dir / ("model-" + name + ".json"));
  }

  E2eResult result;
  std::vector<NamedModel> named;
  for (std::size_t i = 0; i < models.size(); ++i) named.push_back({model_names()[i], &models[i]});
  result.comparison = compare_models(clean, named, config.split.test);
  emit_report(result.comparison, out_dir / "comparison.csv");

  const auto alarm_it = std::find(model_names().begin(), model_names().end(), config.alarm_model);
  const TrainedModel& alarm_model = models[static_cast<std::size_t>(alarm_it - model_names().begin())];
  result.thresholds = calibrate_model(alarm_model, clean, config);
  save_thresholds(result.thresholds, out_dir / "thresholds.json");

  const Detection d = detect_range(alarm_model, observed, result.thresholds, config.split.test);
  result.events = d.events;
  result.alarm_fired = !d.events.empty();
  write_text_file(out_dir / "alarms.csv", format_alarms_csv(d.events, result.thresholds));
  write_text_file(out_dir / "episodes.csv", format_episodes_csv(merge_episodes(d.events, config.merge_gap)));
  write_text_file(out_dir / "trace.csv", format_trace_csv({&d.analysis.actual, &d.analysis.forecast,
                                                            &d.analysis.residue, &d.analysis.stats,
                                                            &result.thresholds, d.events}));
  if (injected) {
    result.detection = detection_report(d.events, injected->mask, observed.first_index(),
                                         std::min(d.analysis.stats.start, fault->start));
    emit_report(*result.detection, out_dir / "detection.csv");
  }
  return result;
}

}  // namespace mpfmfd
