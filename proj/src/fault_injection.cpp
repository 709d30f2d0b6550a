#include "mpfmfd/fault_injection.hpp"

#include <charconv>
#include <cmath>

#include "mpfmfd/error.hpp"
#include "mpfmfd/rng.hpp"

namespace mpfmfd {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double param_double(const std::map<std::string, std::string>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  const auto v = parse_double(it->second);
  if (!v || !std::isfinite(*v)) fail(ErrorCode::InvalidSpec, "fault parameter " + key + " is not a number");
  return *v;
}

Index param_index(const std::map<std::string, std::string>& params, const std::string& key, Index fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  Index v = 0;
  const std::string& s = it->second;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail(ErrorCode::InvalidSpec, "fault parameter " + key + " is not an integer");
  }
  return v;
}

double nominal_sd(const std::vector<double>& values, std::size_t fault_offset) {
  if (fault_offset < 3) fail(ErrorCode::InvalidSpec, "precision degradation needs pre-fault samples");
  const std::size_t n = fault_offset - 1;
  double mean = 0.0;
  for (std::size_t i = 1; i < fault_offset; ++i) mean += values[i] - values[i - 1];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 1; i < fault_offset; ++i) {
    const double d = values[i] - values[i - 1] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n)) / std::sqrt(2.0);
}

}  // namespace

std::string fault_kind_name(const FaultKind& kind) {
  return std::visit(Overloaded{
                        [](const CompleteFailure&) { return std::string("complete-failure"); },
                        [](const PrecisionDegradation&) { return std::string("precision-degradation"); },
                        [](const Drift&) { return std::string("drift"); },
                        [](const Bias&) { return std::string("bias"); },
                        [](const ShutterDrop&) { return std::string("shutter-drop"); },
                        [](const StuckReplay&) { return std::string("stuck-replay"); },
                    },
                    kind);
}

FaultSpec make_fault_spec(const std::string& kind_name, const std::map<std::string, std::string>& params) {
  static const std::map<std::string, std::vector<std::string>> kAllowed = {
      {"complete-failure", {"floor"}},   {"precision-degradation", {"noise_sd_mult"}},
      {"drift", {"slope"}},              {"bias", {"offset"}},
      {"shutter-drop", {"drop"}},        {"stuck-replay", {"replay_len"}},
  };
  const auto allowed = kAllowed.find(kind_name);
  if (allowed == kAllowed.end()) fail(ErrorCode::InvalidSpec, "unknown fault kind '" + kind_name + "'");
  for (const auto& [key, value] : params) {
    const bool common = key == "start" || key == "duration" || key == "channel" || key == "seed";
    const bool specific = allowed->second.front() == key;
    if (!common && !specific) fail(ErrorCode::InvalidSpec, "parameter '" + key + "' does not apply to " + kind_name);
  }

  FaultSpec spec;
  if (kind_name == "complete-failure") {
    spec.kind = CompleteFailure{param_double(params, "floor", CompleteFailure{}.floor)};
  } else if (kind_name == "precision-degradation") {
    spec.kind = PrecisionDegradation{param_double(params, "noise_sd_mult", PrecisionDegradation{}.noise_sd_mult)};
  } else if (kind_name == "drift") {
    spec.kind = Drift{param_double(params, "slope", Drift{}.slope)};
  } else if (kind_name == "bias") {
    spec.kind = Bias{param_double(params, "offset", Bias{}.offset)};
  } else if (kind_name == "shutter-drop") {
    spec.kind = ShutterDrop{param_double(params, "drop", ShutterDrop{}.drop)};
  } else {
    spec.kind = StuckReplay{param_index(params, "replay_len", StuckReplay{}.replay_len)};
  }
  spec.start = param_index(params, "start", 0);
  if (const auto it = params.find("duration"); it != params.end() && it->second != "open") {
    spec.duration = param_index(params, "duration", 0);
  }
  if (const auto it = params.find("channel"); it != params.end()) {
    if (it->second == "G" || it->second == "g") {
      spec.channel = Channel::G;
    } else if (it->second == "C" || it->second == "c") {
      spec.channel = Channel::C;
    } else {
      fail(ErrorCode::InvalidSpec, "channel must be C or G");
    }
  }
  if (const auto it = params.find("seed"); it != params.end()) {
    const std::string& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), spec.seed);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      fail(ErrorCode::InvalidSpec, "fault parameter seed is not an unsigned integer");
    }
  }
  return spec;
}

InjectionResult inject(const SeriesPair& pair, const FaultSpec& spec) {
  const IndexRange bounds = pair.range();
  if (!bounds.contains(spec.start)) fail(ErrorCode::InvalidSpec, "fault start outside series");
  if (spec.duration && (*spec.duration < 1 || spec.start + *spec.duration > bounds.end)) {
    fail(ErrorCode::InvalidSpec, "fault duration must be >= 1 and end within the series");
  }
  const IndexRange fault{spec.start, spec.duration ? spec.start + *spec.duration : bounds.end};
  const auto first = static_cast<std::size_t>(fault.begin - bounds.begin);
  const auto last = static_cast<std::size_t>(fault.end - bounds.begin);

  const std::vector<double> original = pair.channel(spec.channel).values;
  std::vector<double> values = original;

  std::visit(Overloaded{
                 [&](const CompleteFailure& f) {
                   if (!std::isfinite(f.floor)) fail(ErrorCode::InvalidSpec, "floor must be finite");
                   for (std::size_t i = first; i < last; ++i) values[i] = f.floor;
                 },
                 [&](const PrecisionDegradation& f) {
                   if (!(f.noise_sd_mult > 1.0) || !std::isfinite(f.noise_sd_mult)) {
                     fail(ErrorCode::InvalidSpec, "noise_sd_mult must be > 1");
                   }
                   const double sd = (f.noise_sd_mult - 1.0) * nominal_sd(original, first);
                   Xoshiro256 rng(spec.seed);
                   for (std::size_t i = first; i < last; ++i) values[i] += sd * rng.normal();
                 },
                 [&](const Drift& f) {
                   if (!std::isfinite(f.slope)) fail(ErrorCode::InvalidSpec, "slope must be finite");
                   for (std::size_t i = first; i < last; ++i) values[i] += f.slope * static_cast<double>(i - first);
                 },
                 [&](const Bias& f) {
                   if (!std::isfinite(f.offset)) fail(ErrorCode::InvalidSpec, "offset must be finite");
                   for (std::size_t i = first; i < last; ++i) values[i] += f.offset;
                 },
                 [&](const ShutterDrop& f) {
                   if (!(f.drop > 0.0) || !std::isfinite(f.drop)) fail(ErrorCode::InvalidSpec, "drop must be > 0");
                   for (std::size_t i = first; i < last; ++i) values[i] -= f.drop;
                 },
                 [&](const StuckReplay& f) {
                   if (f.replay_len < 1) fail(ErrorCode::InvalidSpec, "replay_len must be >= 1");
                   if (spec.start - f.replay_len < bounds.begin) {
                     fail(ErrorCode::ReplayWindowUnavailable, "need " + std::to_string(f.replay_len) +
                                                                  " samples before the fault start");
                   }
                   const auto len = static_cast<std::size_t>(f.replay_len);
                   for (std::size_t i = first; i < last; ++i) values[i] = original[first - len + (i - first) % len];
                 },
             },
             spec.kind);

  std::vector<bool> mask(pair.size(), false);
  for (std::size_t i = first; i < last; ++i) mask[i] = true;
  return {pair.with_channel(spec.channel, values, mask), mask};
}

}  // namespace mpfmfd
