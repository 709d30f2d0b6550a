// mpfmfd command-line tool. Talks to the library only through mpfmfd.h.
//
// Exit codes: 0 success (no alarm), 1 domain error, 2 usage error,
// 3 success with at least one alarm (detect, e2e).

#include <CLI11.hpp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "mpfmfd/mpfmfd.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAlarm = 3;

struct Failure {
  int exit_code;
};

void check(int status) {
  if (status == MFD_OK) return;
  std::fprintf(stderr, "mpfmfd: %s\n", mfd_last_error());
  throw Failure{status == MFD_E_USAGE ? kExitUsage : kExitError};
}

[[noreturn]] void usage(const std::string& message) {
  std::fprintf(stderr, "mpfmfd: UsageError: %s\n", message.c_str());
  throw Failure{kExitUsage};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<mfd_config, Deleter<mfd_config, mfd_config_free>>;
using SeriesPtr = std::unique_ptr<mfd_series, Deleter<mfd_series, mfd_series_free>>;
using FaultPtr = std::unique_ptr<mfd_fault, Deleter<mfd_fault, mfd_fault_free>>;
using ModelPtr = std::unique_ptr<mfd_model, Deleter<mfd_model, mfd_model_free>>;
using ThresholdsPtr = std::unique_ptr<mfd_thresholds, Deleter<mfd_thresholds, mfd_thresholds_free>>;

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) usage("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

// Precedence: built-in defaults < --config file < --set key=value < --seed.
struct ConfigOptions {
  std::string path;
  std::vector<std::string> sets;
  std::string seed;

  void attach(CLI::App* app) {
    app->add_option("--config", path, "key = value configuration file");
    app->add_option("--set", sets, "override a config key (key=value), repeatable");
    app->add_option("--seed", seed, "master seed; overrides the config file");
  }

  ConfigPtr load() const {
    mfd_config* raw = nullptr;
    check(path.empty() ? mfd_config_new(&raw) : mfd_config_load(path.c_str(), &raw));
    ConfigPtr config(raw);
    for (const std::string& s : sets) {
      const auto [key, value] = split_assignment(s);
      check(mfd_config_set(config.get(), key.c_str(), value.c_str()));
    }
    if (!seed.empty()) check(mfd_config_set(config.get(), "seed", seed.c_str()));
    return config;
  }
};

SeriesPtr load_series(const std::string& path) {
  mfd_series* raw = nullptr;
  check(mfd_series_load(path.c_str(), &raw));
  return SeriesPtr(raw);
}

ModelPtr load_model(const std::string& path) {
  mfd_model* raw = nullptr;
  check(mfd_model_load(path.c_str(), &raw));
  return ModelPtr(raw);
}

void warn_receptive_field(const mfd_config* config) {
  int rf = 0;
  int n = 0;
  check(mfd_config_tcn_shape(config, &rf, &n));
  if (n + 1 < rf) {
    std::fprintf(stderr, "mpfmfd: warning: input window of %d samples is shorter than the receptive field %d\n",
                 n + 1, rf);
  }
}

void warn_channel(char channel) {
  if (channel == 'C') {
    std::fprintf(stderr, "mpfmfd: warning: fault applied to the reference channel C\n");
  }
}

std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) usage("range must be begin:end");
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const std::string a = text.substr(0, colon);
    const std::string b = text.substr(colon + 1);
    const long long begin = std::stoll(a, &used_a);
    const long long end = std::stoll(b, &used_b);
    if (used_a != a.size() || used_b != b.size() || begin >= end) usage("range must be begin:end with begin < end");
    return {begin, end};
  } catch (const std::logic_error&) {
    usage("range must be begin:end");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fault detection for multiphase flow meter sensor pairs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mpfmfd 1.0.0");

  ConfigOptions sim_cfg;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic C/G series");
  sim_cfg.attach(simulate);
  simulate->add_option("--out", sim_out, "output CSV")->required();

  std::string inj_in, inj_out, inj_kind;
  std::vector<std::string> inj_params;
  auto* inject = app.add_subcommand("inject", "inject a fault into a series");
  inject->add_option("--in", inj_in, "input CSV")->required();
  inject->add_option("--out", inj_out, "output CSV with fault column")->required();
  inject->add_option("--fault", inj_kind,
                     "complete-failure | precision-degradation | drift | bias | shutter-drop | stuck-replay")
      ->required();
  inject->add_option("--param", inj_params, "fault parameter key=value, repeatable");

  ConfigOptions train_cfg;
  std::string train_in, train_model, train_out;
  auto* train = app.add_subcommand("train", "fit a forecaster on split.train");
  train_cfg.attach(train);
  train->add_option("--in", train_in, "input CSV")->required();
  train->add_option("--model", train_model, "naive | hardsub | tcn-endo | tcn-exo")->required();
  train->add_option("--out", train_out, "output model file")->required();

  ConfigOptions cal_cfg;
  std::string cal_in, cal_model, cal_out;
  auto* calibrate = app.add_subcommand("calibrate", "learn alarm thresholds on split.calibrate");
  cal_cfg.attach(calibrate);
  calibrate->add_option("--in", cal_in, "input CSV")->required();
  calibrate->add_option("--model", cal_model, "model file")->required();
  calibrate->add_option("--out", cal_out, "output thresholds file")->required();

  std::string det_in, det_model, det_thr, det_range, det_out;
  auto* detect = app.add_subcommand("detect", "raise alarms; exits 3 when any alarm fired");
  detect->add_option("--in", det_in, "input CSV")->required();
  detect->add_option("--model", det_model, "model file")->required();
  detect->add_option("--thresholds", det_thr, "thresholds file")->required();
  detect->add_option("--range", det_range, "begin:end (default: whole series)");
  detect->add_option("--out", det_out, "alarms CSV");

  ConfigOptions cmp_cfg;
  std::string cmp_in, cmp_out;
  std::vector<std::string> cmp_models;
  auto* compare = app.add_subcommand("compare", "MSE of several models on split.test");
  cmp_cfg.attach(compare);
  compare->add_option("--in", cmp_in, "input CSV")->required();
  compare->add_option("--models", cmp_models, "model files")->required();
  compare->add_option("--out", cmp_out, "comparison CSV")->required();

  ConfigOptions e2e_cfg;
  std::string e2e_kind, e2e_out_dir;
  std::vector<std::string> e2e_params;
  auto* e2e = app.add_subcommand("e2e", "simulate, inject, train, compare, calibrate and detect");
  e2e_cfg.attach(e2e);
  e2e->add_option("--fault", e2e_kind, "fault kind (overrides fault.kind)");
  e2e->add_option("--param", e2e_params, "fault parameter key=value (sets fault.<key>), repeatable");
  e2e->add_option("--out-dir", e2e_out_dir, "output directory (overrides io.out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) {
      const ConfigPtr config = sim_cfg.load();
      mfd_series* raw = nullptr;
      check(mfd_simulate(config.get(), &raw));
      const SeriesPtr series(raw);
      check(mfd_series_save(series.get(), sim_out.c_str()));
      return 0;
    }
    if (*inject) {
      const SeriesPtr series = load_series(inj_in);
      mfd_fault* raw_fault = nullptr;
      check(mfd_fault_new(inj_kind.c_str(), &raw_fault));
      const FaultPtr fault(raw_fault);
      for (const std::string& p : inj_params) {
        const auto [key, value] = split_assignment(p);
        check(mfd_fault_set(fault.get(), key.c_str(), value.c_str()));
      }
      warn_channel(mfd_fault_channel(fault.get()));
      mfd_series* raw = nullptr;
      check(mfd_inject(series.get(), fault.get(), &raw));
      const SeriesPtr faulted(raw);
      check(mfd_series_save(faulted.get(), inj_out.c_str()));
      return 0;
    }
    if (*train) {
      const ConfigPtr config = train_cfg.load();
      if (train_model.rfind("tcn", 0) == 0) warn_receptive_field(config.get());
      const SeriesPtr series = load_series(train_in);
      mfd_model* raw = nullptr;
      check(mfd_train(config.get(), series.get(), train_model.c_str(), &raw));
      const ModelPtr model(raw);
      check(mfd_model_save(model.get(), train_out.c_str()));
      return 0;
    }
    if (*calibrate) {
      const ConfigPtr config = cal_cfg.load();
      const SeriesPtr series = load_series(cal_in);
      const ModelPtr model = load_model(cal_model);
      mfd_thresholds* raw = nullptr;
      check(mfd_calibrate(config.get(), model.get(), series.get(), &raw));
      const ThresholdsPtr thresholds(raw);
      check(mfd_thresholds_save(thresholds.get(), cal_out.c_str()));
      return 0;
    }
    if (*detect) {
      std::int64_t begin = 0;
      std::int64_t end = 0;
      if (!det_range.empty()) std::tie(begin, end) = parse_range(det_range);
      const SeriesPtr series = load_series(det_in);
      const ModelPtr model = load_model(det_model);
      mfd_thresholds* raw = nullptr;
      check(mfd_thresholds_load(det_thr.c_str(), &raw));
      const ThresholdsPtr thresholds(raw);
      std::size_t count = 0;
      check(mfd_detect(model.get(), series.get(), thresholds.get(), begin, end,
                       det_out.empty() ? nullptr : det_out.c_str(), &count));
      std::printf("%zu alarm%s\n", count, count == 1 ? "" : "s");
      return count > 0 ? kExitAlarm : 0;
    }
    if (*compare) {
      const ConfigPtr config = cmp_cfg.load();
      const SeriesPtr series = load_series(cmp_in);
      std::vector<ModelPtr> owned;
      std::vector<const mfd_model*> models;
      for (const std::string& path : cmp_models) {
        owned.push_back(load_model(path));
        models.push_back(owned.back().get());
      }
      check(mfd_compare(config.get(), series.get(), models.data(), models.size(), cmp_out.c_str()));
      return 0;
    }
    if (*e2e) {
      const ConfigPtr config = e2e_cfg.load();
      if (!e2e_kind.empty()) check(mfd_config_set(config.get(), "fault.kind", e2e_kind.c_str()));
      for (const std::string& p : e2e_params) {
        const auto [key, value] = split_assignment(p);
        check(mfd_config_set(config.get(), ("fault." + key).c_str(), value.c_str()));
      }
      warn_receptive_field(config.get());
      mfd_fault* raw_fault = nullptr;
      // Fails for fault.kind = none, in which case there is nothing to warn about.
      if (mfd_fault_from_config(config.get(), &raw_fault) == MFD_OK) {
        const FaultPtr fault(raw_fault);
        warn_channel(mfd_fault_channel(fault.get()));
      }
      int alarm = 0;
      check(mfd_run_e2e(config.get(), e2e_out_dir.empty() ? nullptr : e2e_out_dir.c_str(), &alarm));
      std::printf("%s\n", alarm ? "alarm fired" : "no alarm");
      return alarm ? kExitAlarm : 0;
    }
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitUsage;
}
