#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpfmfd/fault_injection.hpp"
#include "mpfmfd/simulator.hpp"
#include "mpfmfd/tcn.hpp"
#include "mpfmfd/timeseries.hpp"

namespace mpfmfd {

// fault.* keys. The magnitude keys are all kept; only the one matching
// `kind` is used.
struct FaultSettings {
  std::string kind = "none";
  Index start = 14000;
  std::optional<Index> duration;
  Channel channel = Channel::G;
  double floor = CompleteFailure{}.floor;
  double noise_sd_mult = PrecisionDegradation{}.noise_sd_mult;
  double slope = Drift{}.slope;
  double offset = Bias{}.offset;
  double drop = ShutterDrop{}.drop;
  Index replay_len = StuckReplay{}.replay_len;
};

// Flat `key = value` configuration. Every key has a default (see
// docs/formats.md). The master `seed` feeds the simulator directly and the
// TCN and fault noise through derive_seed streams 1 and 2.
struct RunConfig {
  std::uint64_t seed = 1;
  SimConfig sim;
  TcnConfig tcn;
  int window_w = 50;
  double safety_factor = 1.0;
  Index merge_gap = 50;
  std::string alarm_model = "tcn-exo";
  SplitSpec split{{0, 6000}, {6000, 12000}, {12000, 20000}};
  std::optional<Index> hardsub_lag;  // nullopt: estimate from training data
  Index hardsub_max_lag = 20;
  FaultSettings fault;
  std::filesystem::path out_dir = "out";

  // Throws InvalidConfig for unknown keys and unparsable values.
  void set(std::string_view key, std::string_view value);

  SimConfig sim_config() const;
  TcnConfig tcn_config() const;
  // fault.* as make_fault_spec parameters (fault seed = derive_seed(seed, 2)).
  std::map<std::string, std::string> fault_params() const;
  std::optional<FaultSpec> fault_spec() const;  // nullopt when fault.kind = none
};

std::vector<std::string> config_keys();

// `#` starts a comment; blank lines are ignored. Later keys override earlier ones.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);

// Canonical dump of every key, in config_keys() order.
std::string format_config(const RunConfig& config);

IndexRange parse_range(std::string_view text);

}  // namespace mpfmfd
