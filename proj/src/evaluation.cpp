#include "mpfmfd/evaluation.hpp"

#include <algorithm>

#include "mpfmfd/error.hpp"

namespace mpfmfd {

double mse(const IndexedSeries& actual, const IndexedSeries& forecast) {
  const IndexRange common = intersect(actual.range(), forecast.range());
  if (common.empty()) fail(ErrorCode::NoOverlap, "actual and forecast index ranges do not overlap");
  double sum = 0.0;
  for (Index t = common.begin; t < common.end; ++t) {
    const double r = actual.at(t) - forecast.at(t);
    sum += r * r;
  }
  return sum / static_cast<double>(common.size());
}

ComparisonReport compare_models(const SeriesPair& pair, std::span<const NamedModel> models, IndexRange test_range) {
  if (models.empty()) fail(ErrorCode::NoCommonRange, "no models to compare");
  IndexRange common = intersect(test_range, pair.range());
  for (const NamedModel& m : models) common = intersect(common, feasible_range(*m.model, pair));
  if (common.empty()) fail(ErrorCode::NoCommonRange, "models share no forecastable index in the test range");

  const IndexedSeries actual = pair.channel(Channel::G).restrict_to(common);
  ComparisonReport report;
  for (const NamedModel& m : models) {
    const IndexedSeries forecast = forecast_series(*m.model, pair, common);
    report.rows.push_back({m.name, mse(actual, forecast), common});
  }
  return report;
}

DetectionReport detection_report(std::span<const AlarmEvent> events, const std::vector<bool>& mask, Index mask_start,
                                 Index warmup) {
  const auto onset = std::find(mask.begin(), mask.end(), true);
  if (onset == mask.end()) fail(ErrorCode::NoFaultInMask, "fault mask has no true entry");
  DetectionReport report;
  report.fault_start = mask_start + (onset - mask.begin());
  if (warmup > report.fault_start) fail(ErrorCode::InvalidConfig, "warmup lies after the fault start");

  for (const AlarmEvent& e : events) {
    if (e.t < report.fault_start) {
      if (e.t >= warmup) ++report.false_alarms_prefault;
      continue;
    }
    if (!report.first_alarm) report.first_alarm = e.t;
    const Index offset = e.t - mask_start;
    if (offset < static_cast<Index>(mask.size()) && mask[static_cast<std::size_t>(offset)]) {
      report.triggers_seen.add(e.trigger);
    }
  }
  if (report.first_alarm) report.latency = *report.first_alarm - report.fault_start;
  return report;
}

std::string format_comparison_csv(const ComparisonReport& report) {
  std::string out = "model,mse,range_start,range_end\n";
  for (const ComparisonRow& row : report.rows) {
    out += row.model_name + "," + format_double(row.mse) + "," + std::to_string(row.test_range.begin) + "," +
           std::to_string(row.test_range.end) + "\n";
  }
  return out;
}

std::string format_detection_csv(const DetectionReport& report) {
  auto opt = [](const std::optional<Index>& v) { return v ? std::to_string(*v) : std::string(); };
  return "fault_start,first_alarm,latency,triggers,false_alarms_prefault\n" + std::to_string(report.fault_start) +
         "," + opt(report.first_alarm) + "," + opt(report.latency) + "," + report.triggers_seen.to_string() + "," +
         std::to_string(report.false_alarms_prefault) + "\n";
}

std::string format_trace_csv(const TraceInputs& trace) {
  const ResidueSeries& res = *trace.residue;
  const ResidueStats& stats = *trace.stats;
  const std::string thr_cells = format_double(trace.thresholds->mean_thr) + "," +
                                format_double(trace.thresholds->std_thr);
  std::string out = "t,actual,forecast,residue,mean_stat,std_stat,mean_thr,std_thr,alarm\n";
  std::size_t next_alarm = 0;
  for (Index t = res.start; t < res.range().end; ++t) {
    while (next_alarm < trace.alarms.size() && trace.alarms[next_alarm].t < t) ++next_alarm;
    const bool alarm = next_alarm < trace.alarms.size() && trace.alarms[next_alarm].t == t;
    out += std::to_string(t);
    out += ',' + format_double(trace.actual->at(t));
    out += ',' + format_double(trace.forecast->at(t));
    out += ',' + format_double(res.at(t));
    if (stats.range().contains(t)) {
      const auto i = static_cast<std::size_t>(t - stats.start);
      out += ',' + format_double(stats.mean_stat[i]) + ',' + format_double(stats.std_stat[i]);
    } else {
      out += ",,";
    }
    out += ',' + thr_cells;
    out += alarm ? ",1\n" : ",0\n";
  }
  return out;
}

void emit_report(const ComparisonReport& report, const std::filesystem::path& path) {
  write_text_file(path, format_comparison_csv(report));
}

void emit_report(const DetectionReport& report, const std::filesystem::path& path) {
  write_text_file(path, format_detection_csv(report));
}

}  // namespace mpfmfd
