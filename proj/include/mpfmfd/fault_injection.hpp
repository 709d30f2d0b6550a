#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mpfmfd/timeseries.hpp"

namespace mpfmfd {

// Sensor output pinned to a constant.
struct CompleteFailure {
  double floor = 0.0;
};

// Extra gaussian noise of sd (noise_sd_mult - 1) * nominal_sd, where
// nominal_sd = sd(first differences) / sqrt(2) over the samples before the fault.
struct PrecisionDegradation {
  double noise_sd_mult = 3.0;
};

// value += slope * (t - start)
struct Drift {
  double slope = 0.001;
};

struct Bias {
  double offset = 1.0;
};

// Closed gamma shutter: a sudden negative step of size `drop`.
struct ShutterDrop {
  double drop = 2.0;
};

// Unplugged cable: the last `replay_len` samples before the fault repeat forever.
struct StuckReplay {
  Index replay_len = 100;
};

using FaultKind = std::variant<CompleteFailure, PrecisionDegradation, Drift, Bias, ShutterDrop, StuckReplay>;

struct FaultSpec {
  FaultKind kind = Bias{};
  Index start = 0;
  std::optional<Index> duration;  // nullopt: until the end of the series
  Channel channel = Channel::G;
  std::uint64_t seed = 0;  // noise for PrecisionDegradation
};

std::string fault_kind_name(const FaultKind& kind);

// Builds a spec from a kind name (complete-failure, precision-degradation,
// drift, bias, shutter-drop, stuck-replay) and key=value parameters:
// start, duration ("open" or a count), channel (C|G), seed, and the kind's
// magnitude (floor, noise_sd_mult, slope, offset, drop, replay_len).
FaultSpec make_fault_spec(const std::string& kind_name, const std::map<std::string, std::string>& params);

struct InjectionResult {
  SeriesPair faulted;  // carries `mask` as its fault column
  std::vector<bool> mask;
};

InjectionResult inject(const SeriesPair& pair, const FaultSpec& spec);

}  // namespace mpfmfd
