#include "mpfmfd/run_config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

#include "mpfmfd/error.hpp"
#include "mpfmfd/rng.hpp"

namespace mpfmfd {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  fail(ErrorCode::InvalidConfig, std::string(key) + " = '" + std::string(value) + "' is not " + expected);
}

template <class Int>
Int to_int(std::string_view key, std::string_view value) {
  Int v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return v;
}

int to_small_int(std::string_view key, std::string_view value) {
  const auto v = to_int<std::int64_t>(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    bad_value(key, value, "a 32-bit integer");
  }
  return static_cast<int>(v);
}

double to_real(std::string_view key, std::string_view value) {
  const auto v = parse_double(value);
  if (!v || !std::isfinite(*v)) bad_value(key, value, "a finite number");
  return *v;
}

std::string opt_index(const std::optional<Index>& v, const char* none) {
  return v ? std::to_string(*v) : std::string(none);
}

std::string range_text(const IndexRange& r) { return std::to_string(r.begin) + ":" + std::to_string(r.end); }

struct KeyDef {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MPFMFD_INT_KEY(name, member, type)                                                     \
  KeyDef {                                                                                     \
    name, [](RunConfig& c, std::string_view v) { c.member = to_int<type>(name, v); },          \
        [](const RunConfig& c) { return std::to_string(c.member); }                            \
  }
#define MPFMFD_SMALL_KEY(name, member)                                                         \
  KeyDef {                                                                                     \
    name, [](RunConfig& c, std::string_view v) { c.member = to_small_int(name, v); },          \
        [](const RunConfig& c) { return std::to_string(c.member); }                            \
  }
#define MPFMFD_REAL_KEY(name, member)                                                          \
  KeyDef {                                                                                     \
    name, [](RunConfig& c, std::string_view v) { c.member = to_real(name, v); },               \
        [](const RunConfig& c) { return format_double(c.member); }                             \
  }
#define MPFMFD_RANGE_KEY(name, member)                                                         \
  KeyDef {                                                                                     \
    name, [](RunConfig& c, std::string_view v) { c.member = parse_range(v); },                 \
        [](const RunConfig& c) { return range_text(c.member); }                                \
  }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = {
      MPFMFD_INT_KEY("seed", seed, std::uint64_t),
      MPFMFD_INT_KEY("sim.length", sim.length, Index),
      MPFMFD_INT_KEY("sim.lag_m", sim.lag_m, Index),
      MPFMFD_REAL_KEY("sim.ar_coeff", sim.ar_coeff),
      MPFMFD_REAL_KEY("sim.latent_noise_sd", sim.latent_noise_sd),
      MPFMFD_REAL_KEY("sim.gain", sim.gain),
      MPFMFD_REAL_KEY("sim.offset", sim.offset),
      MPFMFD_REAL_KEY("sim.obs_noise_sd_c", sim.obs_noise_sd_c),
      MPFMFD_REAL_KEY("sim.obs_noise_sd_g", sim.obs_noise_sd_g),
      MPFMFD_REAL_KEY("sim.burst_amplitude", sim.burst_amplitude),
      MPFMFD_REAL_KEY("sim.burst_rate", sim.burst_rate),
      MPFMFD_SMALL_KEY("tcn.input_window_n", tcn.input_window_n),
      MPFMFD_SMALL_KEY("tcn.channels", tcn.channels),
      MPFMFD_SMALL_KEY("tcn.kernel_size", tcn.kernel_size),
      MPFMFD_SMALL_KEY("tcn.num_blocks", tcn.num_blocks),
      MPFMFD_REAL_KEY("tcn.learning_rate", tcn.learning_rate),
      MPFMFD_SMALL_KEY("tcn.epochs", tcn.epochs),
      MPFMFD_SMALL_KEY("tcn.batch_size", tcn.batch_size),
      MPFMFD_REAL_KEY("tcn.dropout_rate", tcn.dropout_rate),
      MPFMFD_SMALL_KEY("alarm.window_w", window_w),
      MPFMFD_REAL_KEY("alarm.safety_factor", safety_factor),
      MPFMFD_INT_KEY("alarm.merge_gap", merge_gap, Index),
      KeyDef{"alarm.model",
             [](RunConfig& c, std::string_view v) {
               if (v != "naive" && v != "hardsub" && v != "tcn-endo" && v != "tcn-exo") {
                 bad_value("alarm.model", v, "one of naive, hardsub, tcn-endo, tcn-exo");
               }
               c.alarm_model = std::string(v);
             },
             [](const RunConfig& c) { return c.alarm_model; }},
      MPFMFD_RANGE_KEY("split.train", split.train),
      MPFMFD_RANGE_KEY("split.calibrate", split.calibrate),
      MPFMFD_RANGE_KEY("split.test", split.test),
      KeyDef{"hardsub.lag",
             [](RunConfig& c, std::string_view v) {
               c.hardsub_lag = v == "auto" ? std::nullopt : std::optional<Index>(to_int<Index>("hardsub.lag", v));
             },
             [](const RunConfig& c) { return opt_index(c.hardsub_lag, "auto"); }},
      MPFMFD_INT_KEY("hardsub.max_lag", hardsub_max_lag, Index),
      KeyDef{"fault.kind",
             [](RunConfig& c, std::string_view v) {
               if (v != "none") make_fault_spec(std::string(v), {});
               c.fault.kind = std::string(v);
             },
             [](const RunConfig& c) { return c.fault.kind; }},
      MPFMFD_INT_KEY("fault.start", fault.start, Index),
      KeyDef{"fault.duration",
             [](RunConfig& c, std::string_view v) {
               c.fault.duration =
                   v == "open" ? std::nullopt : std::optional<Index>(to_int<Index>("fault.duration", v));
             },
             [](const RunConfig& c) { return opt_index(c.fault.duration, "open"); }},
      KeyDef{"fault.channel",
             [](RunConfig& c, std::string_view v) {
               if (v == "G") {
                 c.fault.channel = Channel::G;
               } else if (v == "C") {
                 c.fault.channel = Channel::C;
               } else {
                 bad_value("fault.channel", v, "C or G");
               }
             },
             [](const RunConfig& c) { return std::string(channel_name(c.fault.channel)); }},
      MPFMFD_REAL_KEY("fault.floor", fault.floor),
      MPFMFD_REAL_KEY("fault.noise_sd_mult", fault.noise_sd_mult),
      MPFMFD_REAL_KEY("fault.slope", fault.slope),
      MPFMFD_REAL_KEY("fault.offset", fault.offset),
      MPFMFD_REAL_KEY("fault.drop", fault.drop),
      MPFMFD_INT_KEY("fault.replay_len", fault.replay_len, Index),
      KeyDef{"io.out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
             [](const RunConfig& c) { return c.out_dir.string(); }},
  };
  return table;
}

#undef MPFMFD_INT_KEY
#undef MPFMFD_SMALL_KEY
#undef MPFMFD_REAL_KEY
#undef MPFMFD_RANGE_KEY

}  // namespace

IndexRange parse_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) bad_value("range", text, "of the form begin:end");
  const IndexRange r{to_int<Index>("range begin", trim(text.substr(0, colon))),
                     to_int<Index>("range end", trim(text.substr(colon + 1)))};
  if (r.begin >= r.end) bad_value("range", text, "begin:end with begin < end");
  return r;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const KeyDef& def : key_table()) {
    if (key == def.key) {
      def.set(*this, value);
      return;
    }
  }
  fail(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
}

SimConfig RunConfig::sim_config() const {
  SimConfig c = sim;
  c.seed = seed;
  return c;
}

TcnConfig RunConfig::tcn_config() const {
  TcnConfig c = tcn;
  c.seed = derive_seed(seed, 1);
  return c;
}

std::map<std::string, std::string> RunConfig::fault_params() const {
  std::map<std::string, std::string> params;
  if (fault.kind == "complete-failure") params["floor"] = format_double(fault.floor);
  if (fault.kind == "precision-degradation") params["noise_sd_mult"] = format_double(fault.noise_sd_mult);
  if (fault.kind == "drift") params["slope"] = format_double(fault.slope);
  if (fault.kind == "bias") params["offset"] = format_double(fault.offset);
  if (fault.kind == "shutter-drop") params["drop"] = format_double(fault.drop);
  if (fault.kind == "stuck-replay") params["replay_len"] = std::to_string(fault.replay_len);
  params["start"] = std::to_string(fault.start);
  params["duration"] = opt_index(fault.duration, "open");
  params["channel"] = std::string(channel_name(fault.channel));
  params["seed"] = std::to_string(derive_seed(seed, 2));
  return params;
}

std::optional<FaultSpec> RunConfig::fault_spec() const {
  if (fault.kind == "none") return std::nullopt;
  return make_fault_spec(fault.kind, fault_params());
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const KeyDef& def : key_table()) keys.emplace_back(def.key);
  return keys;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(ErrorCode::InvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const KeyDef& def : key_table()) out += std::string(def.key) + " = " + def.get(config) + "\n";
  return out;
}

}  // namespace mpfmfd
