#ifndef HYBRIDLINK_H
#define HYBRIDLINK_H

/* Generated by cbindgen from the hybridlink-ffi crate. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define HL_PROTOCOL_BLE 0

#define HL_PROTOCOL_WIFI 1

#define HL_DIRECTION_BLE_TO_WIFI 0

#define HL_DIRECTION_WIFI_TO_BLE 1

#define HL_CHANNEL_BLE 0

#define HL_CHANNEL_BLE_FEM 1

#define HL_CHANNEL_WIFI_2G4 2

#define HL_CHANNEL_WIFI_5G 3

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_ARGUMENT = 1,
  HL_STATUS_INVALID_UTF8 = 2,
  HL_STATUS_CONFIG = 3,
  HL_STATUS_SIMULATION = 4,
  HL_STATUS_OUT_OF_RANGE = 5,
  HL_STATUS_PANIC = 6,
} HlStatus;

/*
 Opaque handle to a finished run.
 */
typedef struct HlRun HlRun;

/*
 Opaque scenario handle.
 */
typedef struct HlScenario HlScenario;

/*
 Creates a scenario with default settings.

 # Safety
 `out` must be null or valid for writes.
 */
enum HlStatus hl_scenario_default(struct HlScenario **out);

/*
 Parses and validates a scenario from JSON. Missing fields take defaults.

 # Safety
 `json` must be null or a NUL-terminated string; `out` must be null or
 valid for writes.
 */
enum HlStatus hl_scenario_from_json(const char *json, struct HlScenario **out);

/*
 Applies one `key=value` override, e.g. `wifi.band=5`. On failure the
 scenario is unchanged.

 # Safety
 `scenario` must be null or a live handle; `key_value` must be null or a
 NUL-terminated string.
 */
enum HlStatus hl_scenario_set(struct HlScenario *scenario, const char *key_value);

/*
 Serializes the scenario, including every default, as JSON.

 # Safety
 `scenario` must be null or a live handle; `out` must be null or valid for
 writes.
 */
enum HlStatus hl_scenario_to_json(const struct HlScenario *scenario, char **out);

/*
 # Safety
 `scenario` must be null or a handle not yet freed.
 */
void hl_scenario_free(struct HlScenario *scenario);

/*
 Runs the scenario to completion. A run whose integrity verdict is FAIL
 still succeeds here; query it with [`hl_run_integrity_pass`].

 # Safety
 `scenario` must be null or a live handle; `out` must be null or valid for
 writes.
 */
enum HlStatus hl_run(const struct HlScenario *scenario, struct HlRun **out);

/*
 # Safety
 `run` must be null or a live handle; `out` must be null or valid for writes.
 */
enum HlStatus hl_run_summary_json(const struct HlRun *run, char **out);

/*
 # Safety
 `run` must be null or a live handle; `out` must be null or valid for writes.
 */
enum HlStatus hl_run_trace_csv(const struct HlRun *run, char **out);

/*
 # Safety
 `run` must be null or a live handle; `out` must be null or valid for writes.
 */
enum HlStatus hl_run_switch_count(const struct HlRun *run, size_t *out);

/*
 Latency of the `index`-th completed switch, in ms.

 # Safety
 `run` must be null or a live handle; `out` must be null or valid for writes.
 */
enum HlStatus hl_run_switch_latency_ms(const struct HlRun *run, size_t index, double *out);

/*
 # Safety
 `run` must be null or a live handle; `out` must be null or valid for writes.
 */
enum HlStatus hl_run_integrity_pass(const struct HlRun *run, bool *out);

/*
 # Safety
 `run` must be null or a handle not yet freed.
 */
void hl_run_free(struct HlRun *run);

/*
 Switch latency for a request issued at a frame start, with the default
 calibration.

 # Safety
 `out` must be null or valid for writes.
 */
enum HlStatus hl_predict_latency_ms(double size_kb, uint32_t direction_code, double *out);

/*
 Noise-free RSSI for a default channel profile.

 # Safety
 `out` must be null or valid for writes.
 */
enum HlStatus hl_rssi_at(uint32_t channel, double txp_dbm, double depth_cm, double *out);

/*
 Steady throughput in kbps at `rssi_dbm` on the default curve for
 `protocol`.

 # Safety
 `out` must be null or valid for writes.
 */
enum HlStatus hl_throughput_kbps(uint32_t protocol, double rssi_dbm, double *out);

/*
 Message for the last failed call on this thread, or an empty string. The
 pointer stays valid until the next call into this library on the thread.
 */
const char *hl_last_error_message(void);

/*
 # Safety
 `s` must be null or a string returned by this library and not yet freed.
 */
void hl_string_free(char *s);

/*
 Library version as a static NUL-terminated string.
 */
const char *hl_version(void);

#endif  /* HYBRIDLINK_H */
