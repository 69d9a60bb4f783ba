#ifndef COVKG_H
#define COVKG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define COVKG_OK 0

#define COVKG_ERR_NULL -1

#define COVKG_ERR_UTF8 -2

#define COVKG_ERR_CONFIG -3

#define COVKG_ERR_COMPUTE -4

#define COVKG_ERR_RANGE -5

#define COVKG_ERR_PANIC -6

/**
 * Run configuration.
 */
typedef struct CovkgConfig CovkgConfig;

/**
 * Result of a verification run.
 */
typedef struct CovkgReport CovkgReport;

/**
 * Flat cylinder with a fixed grid and mass.
 */
typedef struct CovkgSpacetime CovkgSpacetime;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the latest failure on this thread, empty if none. Valid until the next
 * failing call on the same thread; do not free.
 */
const char *covkg_last_error(void);

/**
 * Built-in defaults (256 x 512, m = 1, L = 2 pi).
 */
struct CovkgConfig *covkg_config_default(void);

/**
 * Defaults overlaid with `key = value` text.
 */
int32_t covkg_config_parse(const char *text_, struct CovkgConfig **out);

void covkg_config_free(struct CovkgConfig *cfg);

/**
 * Run suites (comma separated names, or null for the configured list).
 */
int32_t covkg_verify(const struct CovkgConfig *cfg, const char *suites, struct CovkgReport **out);

/**
 * 1 if every record passed, 0 otherwise, negative on a null handle.
 */
int32_t covkg_report_pass(const struct CovkgReport *r);

/**
 * Number of records; 0 for a null handle.
 */
size_t covkg_report_len(const struct CovkgReport *r);

/**
 * Measured value, tolerance and verdict of record `i`. Any out pointer may be null.
 */
int32_t covkg_report_record(const struct CovkgReport *r,
                            size_t i,
                            double *measured,
                            double *tolerance,
                            int32_t *pass);

/**
 * Name of record `i`, caller frees. Null on error.
 */
char *covkg_report_record_name(const struct CovkgReport *r, size_t i);

/**
 * Whole report as pretty JSON, caller frees. Null on error.
 */
char *covkg_report_json(const struct CovkgReport *r);

void covkg_report_free(struct CovkgReport *r);

void covkg_string_free(char *s);

/**
 * Flat cylinder of circumference `length` with `n_x` sites, `n_t` levels from t = 0
 * and time step `courant * dx`.
 */
int32_t covkg_spacetime_flat(size_t n_x,
                             size_t n_t,
                             double length,
                             double courant,
                             double mass,
                             struct CovkgSpacetime **out);

void covkg_spacetime_free(struct CovkgSpacetime *st);

/**
 * E(f, g) for two bumps given as `{t_center, x_center, t_radius, x_radius}`: the
 * volume pairing of f with the causal propagator applied to g.
 */
int32_t covkg_causal_pairing(const struct CovkgSpacetime *st,
                             const double *f,
                             const double *g,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVKG_H */
