/* C interface to the bct simulation library (libbct).
 *
 * All handles are opaque. Every function that can fail returns a bct_status;
 * the message for the most recent failure on the calling thread is available
 * from bct_last_error(). Strings passed in must be NUL-terminated UTF-8.
 */
#ifndef BCT_API_H
#define BCT_API_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BCT_API __declspec(dllexport)
#else
#define BCT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bct_status {
    BCT_OK = 0,
    BCT_INVALID_ARGUMENT = 1, /* null handle, bad key, value out of domain */
    BCT_CONFIG = 2,           /* configuration rejected by validation */
    BCT_IO = 3,               /* output could not be written */
    BCT_INTERNAL = 4
} bct_status;

typedef struct bct_config bct_config;
typedef struct bct_table bct_table;

/* experiment: correlation | opposite-axes | visibility | audit | remedy | calibrate */
BCT_API bct_status bct_config_create(const char* experiment, bct_config** out);
BCT_API void bct_config_destroy(bct_config* config);

/* Keys: trials, seed, workers, strategy, flip-semantics, coin, format, out,
 * alice, bob, alice-grid, angle-grid, nu-grid, theta-grid, visibility-grid.
 * Grids take "lo:hi:steps" or a comma list; numbers accept a "pi" suffix. */
BCT_API bct_status bct_config_set(bct_config* config, const char* key, const char* value);

BCT_API bct_status bct_run(const bct_config* config, bct_table** out);
BCT_API void bct_table_destroy(bct_table* table);

BCT_API size_t bct_table_rows(const bct_table* table);

/* format: "csv" or "json". path NULL, "" or "-" writes to stdout. */
BCT_API bct_status bct_table_write(const bct_table* table, const char* format, const char* path);

/* Copies the rendered table into buf (NUL-terminated, truncated to cap).
 * *needed receives the full length excluding the terminator. buf may be NULL
 * when cap is 0. */
BCT_API bct_status bct_table_render(const bct_table* table, const char* format, char* buf,
                                    size_t cap, size_t* needed);

/* Runs one seeded two-Bob trial and writes the JSON trial records (one per
 * Bob, newline separated) to buf under the same truncation rules. */
BCT_API bct_status bct_trial_dump(const bct_config* config, double a, double b, char* buf,
                                  size_t cap, size_t* needed);

BCT_API const char* bct_last_error(void);
BCT_API const char* bct_version(void);

/* Analytic helpers. */
BCT_API bct_status bct_qm_prob_equal(double a, double b, double* out);
BCT_API bct_status bct_p_opposite_equal(double nu, double* p1, double* p2, double* total);
BCT_API bct_status bct_visibility_threshold(double nu, double* out);

#ifdef __cplusplus
}
#endif

#endif /* BCT_API_H */
