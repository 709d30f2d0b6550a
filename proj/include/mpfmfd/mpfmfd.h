/* C interface to the mpfmfd fault-detection library.
 *
 * Every function returning int returns MFD_OK (0) or one of the MFD_E_* codes.
 * On failure, mfd_last_error() describes the most recent error on the calling
 * thread. Objects are opaque handles; each *_free accepts NULL.
 */
#ifndef MPFMFD_H
#define MPFMFD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MFD_API __declspec(dllexport)
#else
#define MFD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MFD_OK = 0,
  MFD_E_MALFORMED_ROW = 1,
  MFD_E_INDEX_GAP,
  MFD_E_NON_FINITE,
  MFD_E_OUT_OF_RANGE,
  MFD_E_INVALID_SPLIT,
  MFD_E_INVALID_CONFIG,
  MFD_E_EMPTY_HISTORY,
  MFD_E_SERIES_TOO_SHORT,
  MFD_E_WRONG_WINDOW_LENGTH,
  MFD_E_MODEL_KIND_MISMATCH,
  MFD_E_NON_FINITE_LOSS,
  MFD_E_VERSION_MISMATCH,
  MFD_E_CORRUPT_FILE,
  MFD_E_NO_OVERLAP,
  MFD_E_WINDOW_TOO_LARGE,
  MFD_E_WINDOW_TOO_SMALL,
  MFD_E_EMPTY_STATS,
  MFD_E_UNSORTED_EVENTS,
  MFD_E_INVALID_SPEC,
  MFD_E_REPLAY_WINDOW_UNAVAILABLE,
  MFD_E_NO_COMMON_RANGE,
  MFD_E_NO_FAULT_IN_MASK,
  MFD_E_IO,
  MFD_E_USAGE,
  MFD_E_INTERNAL = 100
};

typedef struct mfd_config mfd_config;
typedef struct mfd_series mfd_series;
typedef struct mfd_fault mfd_fault;
typedef struct mfd_model mfd_model;
typedef struct mfd_thresholds mfd_thresholds;

/* Error name such as "InvalidConfig"; "Ok" for MFD_OK, "Unknown" otherwise. */
MFD_API const char* mfd_status_name(int status);
MFD_API const char* mfd_last_error(void);

/* Configuration (flat key = value, see docs/formats.md). */
MFD_API int mfd_config_new(mfd_config** out);
MFD_API int mfd_config_load(const char* path, mfd_config** out);
MFD_API int mfd_config_set(mfd_config* config, const char* key, const char* value);
/* Writes the canonical dump of every key into a malloc'd string; free with mfd_string_free. */
MFD_API int mfd_config_dump(const mfd_config* config, char** out);
/* TCN receptive field and input window length n implied by the config. */
MFD_API int mfd_config_tcn_shape(const mfd_config* config, int* receptive_field, int* input_window_n);
MFD_API void mfd_config_free(mfd_config* config);
MFD_API void mfd_string_free(char* s);

/* Series. */
MFD_API int mfd_simulate(const mfd_config* config, mfd_series** out);
MFD_API int mfd_series_load(const char* path, mfd_series** out);
MFD_API int mfd_series_save(const mfd_series* series, const char* path);
MFD_API size_t mfd_series_length(const mfd_series* series);
MFD_API int mfd_series_record(const mfd_series* series, size_t i, int64_t* t, double* c, double* g);
MFD_API void mfd_series_free(mfd_series* series);

/* Faults: kind is complete-failure, precision-degradation, drift, bias,
 * shutter-drop or stuck-replay; parameters as for --param. */
MFD_API int mfd_fault_new(const char* kind, mfd_fault** out);
MFD_API int mfd_fault_from_config(const mfd_config* config, mfd_fault** out);
MFD_API int mfd_fault_set(mfd_fault* fault, const char* key, const char* value);
/* 'C' or 'G'; 0 for NULL. */
MFD_API char mfd_fault_channel(const mfd_fault* fault);
MFD_API int mfd_inject(const mfd_series* series, const mfd_fault* fault, mfd_series** out);
MFD_API void mfd_fault_free(mfd_fault* fault);

/* Models: name is naive, hardsub, tcn-endo or tcn-exo. Trains on split.train. */
MFD_API int mfd_train(const mfd_config* config, const mfd_series* series, const char* name, mfd_model** out);
MFD_API int mfd_model_save(const mfd_model* model, const char* path);
MFD_API int mfd_model_load(const char* path, mfd_model** out);
/* "naive", "hardsub", "tcn-endo" or "tcn-exo". */
MFD_API const char* mfd_model_label(const mfd_model* model);
MFD_API void mfd_model_free(mfd_model* model);

/* Thresholds from the split.calibrate range, alarm.window_w and alarm.safety_factor. */
MFD_API int mfd_calibrate(const mfd_config* config, const mfd_model* model, const mfd_series* series,
                          mfd_thresholds** out);
MFD_API int mfd_thresholds_save(const mfd_thresholds* thresholds, const char* path);
MFD_API int mfd_thresholds_load(const char* path, mfd_thresholds** out);
MFD_API void mfd_thresholds_free(mfd_thresholds* thresholds);

/* Detects on [begin, end); pass begin >= end for the whole series. Writes the
 * alarms CSV to alarms_path (may be NULL) and the count to *alarm_count. */
MFD_API int mfd_detect(const mfd_model* model, const mfd_series* series, const mfd_thresholds* thresholds,
                       int64_t begin, int64_t end, const char* alarms_path, size_t* alarm_count);

/* Comparison CSV over split.test; rows are labelled with mfd_model_label. */
MFD_API int mfd_compare(const mfd_config* config, const mfd_series* series, const mfd_model* const* models,
                        size_t count, const char* path);

/* Full pipeline into out_dir (io.out_dir when NULL). *alarm_fired is 1 when
 * detection raised any alarm. */
MFD_API int mfd_run_e2e(const mfd_config* config, const char* out_dir, int* alarm_fired);

#ifdef __cplusplus
}
#endif

#endif
