#include "mpfmfd/mpfmfd.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <new>
#include <string>

#include "mpfmfd/error.hpp"
#include "mpfmfd/fault_injection.hpp"
#include "mpfmfd/pipeline.hpp"

struct mfd_config {
  mpfmfd::RunConfig value;
};

struct mfd_series {
  mpfmfd::SeriesPair value;
};

struct mfd_fault {
  std::string kind;
  std::map<std::string, std::string> params;
  mpfmfd::FaultSpec spec;
};

struct mfd_model {
  mpfmfd::TrainedModel value;
  std::string label;
};

struct mfd_thresholds {
  mpfmfd::Thresholds value;
};

namespace {

thread_local std::string last_error;

template <class F>
int guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return MFD_OK;
  } catch (const mpfmfd::Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return MFD_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = std::string("internal error: ") + e.what();
    return MFD_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) mpfmfd::fail(mpfmfd::ErrorCode::UsageError, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* mfd_status_name(int status) {
  if (status == MFD_OK) return "Ok";
  if (status == MFD_E_INTERNAL) return "Internal";
  if (status < MFD_E_MALFORMED_ROW || status > MFD_E_USAGE) return "Unknown";
  // error_name returns views of string literals, so data() is NUL-terminated.
  return mpfmfd::error_name(static_cast<mpfmfd::ErrorCode>(status)).data();
}

const char* mfd_last_error(void) { return last_error.c_str(); }

int mfd_config_new(mfd_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new mfd_config{};
  });
}

int mfd_config_load(const char* path, mfd_config** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = new mfd_config{mpfmfd::load_config(path)};
  });
}

int mfd_config_set(mfd_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "config, key and value");
    config->value.set(key, value);
  });
}

int mfd_config_dump(const mfd_config* config, char** out) {
  return guarded([&] {
    require(config && out, "config and out");
    const std::string text = mpfmfd::format_config(config->value);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

int mfd_config_tcn_shape(const mfd_config* config, int* receptive_field, int* input_window_n) {
  return guarded([&] {
    require(config && receptive_field && input_window_n, "config and outputs");
    *receptive_field = mpfmfd::receptive_field(config->value.tcn);
    *input_window_n = config->value.tcn.input_window_n;
  });
}

void mfd_config_free(mfd_config* config) { delete config; }

void mfd_string_free(char* s) { std::free(s); }

int mfd_simulate(const mfd_config* config, mfd_series** out) {
  return guarded([&] {
    require(config && out, "config and out");
    *out = new mfd_series{mpfmfd::generate(config->value.sim_config())};
  });
}

int mfd_series_load(const char* path, mfd_series** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = new mfd_series{mpfmfd::load_csv(path)};
  });
}

int mfd_series_save(const mfd_series* series, const char* path) {
  return guarded([&] {
    require(series && path, "series and path");
    mpfmfd::emit_csv(series->value, path);
  });
}

size_t mfd_series_length(const mfd_series* series) { return series ? series->value.size() : 0; }

int mfd_series_record(const mfd_series* series, size_t i, int64_t* t, double* c, double* g) {
  return guarded([&] {
    require(series && t && c && g, "series and outputs");
    if (i >= series->value.size()) mpfmfd::fail(mpfmfd::ErrorCode::OutOfRange, "record index out of range");
    const mpfmfd::Record& r = series->value.records()[i];
    *t = r.t;
    *c = r.c;
    *g = r.g;
  });
}

void mfd_series_free(mfd_series* series) { delete series; }

int mfd_fault_new(const char* kind, mfd_fault** out) {
  return guarded([&] {
    require(kind && out, "kind and out");
    auto* f = new mfd_fault{kind, {}, mpfmfd::make_fault_spec(kind, {})};
    *out = f;
  });
}

int mfd_fault_from_config(const mfd_config* config, mfd_fault** out) {
  return guarded([&] {
    require(config && out, "config and out");
    const auto spec = config->value.fault_spec();
    if (!spec) mpfmfd::fail(mpfmfd::ErrorCode::InvalidSpec, "fault.kind is none");
    *out = new mfd_fault{config->value.fault.kind, config->value.fault_params(), *spec};
  });
}

int mfd_fault_set(mfd_fault* fault, const char* key, const char* value) {
  return guarded([&] {
    require(fault && key && value, "fault, key and value");
    auto params = fault->params;
    params[key] = value;
    fault->spec = mpfmfd::make_fault_spec(fault->kind, params);
    fault->params = std::move(params);
  });
}

char mfd_fault_channel(const mfd_fault* fault) {
  if (!fault) return 0;
  return fault->spec.channel == mpfmfd::Channel::C ? 'C' : 'G';
}

int mfd_inject(const mfd_series* series, const mfd_fault* fault, mfd_series** out) {
  return guarded([&] {
    require(series && fault && out, "series, fault and out");
    *out = new mfd_series{mpfmfd::inject(series->value, fault->spec).faulted};
  });
}

void mfd_fault_free(mfd_fault* fault) { delete fault; }

int mfd_train(const mfd_config* config, const mfd_series* series, const char* name, mfd_model** out) {
  return guarded([&] {
    require(config && series && name && out, "config, series, name and out");
    auto model = mpfmfd::train_forecaster(series->value, config->value, name);
    *out = new mfd_model{model, mpfmfd::kind_label(model.kind)};
  });
}

int mfd_model_save(const mfd_model* model, const char* path) {
  return guarded([&] {
    require(model && path, "model and path");
    mpfmfd::save_model(model->value, path);
  });
}

int mfd_model_load(const char* path, mfd_model** out) {
  return guarded([&] {
    require(path && out, "path and out");
    auto model = mpfmfd::load_model(path);
    *out = new mfd_model{model, mpfmfd::kind_label(model.kind)};
  });
}

const char* mfd_model_label(const mfd_model* model) { return model ? model->label.c_str() : ""; }

void mfd_model_free(mfd_model* model) { delete model; }

int mfd_calibrate(const mfd_config* config, const mfd_model* model, const mfd_series* series,
                  mfd_thresholds** out) {
  return guarded([&] {
    require(config && model && series && out, "config, model, series and out");
    *out = new mfd_thresholds{mpfmfd::calibrate_model(model->value, series->value, config->value)};
  });
}

int mfd_thresholds_save(const mfd_thresholds* thresholds, const char* path) {
  return guarded([&] {
    require(thresholds && path, "thresholds and path");
    mpfmfd::save_thresholds(thresholds->value, path);
  });
}

int mfd_thresholds_load(const char* path, mfd_thresholds** out) {
  return guarded([&] {
    require(path && out, "path and out");
    *out = new mfd_thresholds{mpfmfd::load_thresholds(path)};
  });
}

void mfd_thresholds_free(mfd_thresholds* thresholds) { delete thresholds; }

int mfd_detect(const mfd_model* model, const mfd_series* series, const mfd_thresholds* thresholds, int64_t begin,
               int64_t end, const char* alarms_path, size_t* alarm_count) {
  return guarded([&] {
    require(model && series && thresholds && alarm_count, "model, series, thresholds and alarm_count");
    const mpfmfd::IndexRange range = begin < end ? mpfmfd::IndexRange{begin, end} : series->value.range();
    const auto d = mpfmfd::detect_range(model->value, series->value, thresholds->value, range);
    if (alarms_path) mpfmfd::write_text_file(alarms_path, mpfmfd::format_alarms_csv(d.events, thresholds->value));
    *alarm_count = d.events.size();
  });
}

int mfd_compare(const mfd_config* config, const mfd_series* series, const mfd_model* const* models, size_t count,
                const char* path) {
  return guarded([&] {
    require(config && series && (models || count == 0) && path, "config, series, models and path");
    std::vector<mpfmfd::NamedModel> named;
    for (size_t i = 0; i < count; ++i) {
      require(models[i], "models[i]");
      named.push_back({models[i]->label, &models[i]->value});
    }
    const auto report = mpfmfd::compare_models(series->value, named, config->value.split.test);
    mpfmfd::emit_report(report, path);
  });
}

int mfd_run_e2e(const mfd_config* config, const char* out_dir, int* alarm_fired) {
  return guarded([&] {
    require(config && alarm_fired, "config and alarm_fired");
    const auto result =
        mpfmfd::run_e2e(config->value, out_dir ? std::filesystem::path(out_dir) : config->value.out_dir);
    *alarm_fired = result.alarm_fired ? 1 : 0;
  });
}

}  // extern "C"
