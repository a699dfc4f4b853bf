/* C interface to the oscillatory-solution construction library.
 *
 * All functions return an error code (WF_OK on success); on failure the
 * thread-local message from wf_last_error() describes what went wrong.
 * Objects are opaque handles freed by their matching *_free function;
 * strings returned through char** out-parameters are heap-allocated and
 * must be released with wf_string_free.
 */
#ifndef WFORGE_H
#define WFORGE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Error codes; the CLI reuses them as process exit codes. */
enum {
  WF_OK = 0,
  WF_ERR_INTERNAL = 1,       /* unexpected failure */
  WF_ERR_CONFIG = 2,         /* bad configuration or parameter */
  WF_ERR_PRECONDITION = 3,   /* runtime precondition violated */
  WF_ERR_NONCONVERGENCE = 4, /* iterative search missed its target */
  WF_ERR_IO = 5              /* filesystem or format problem */
};

typedef struct wf_config wf_config; /* parsed run configuration */
typedef struct wf_run wf_run;       /* finished construction run */

/* Message for the most recent failure on this thread ("" if none). */
const char* wf_last_error(void);
void wf_string_free(char* s);

/* --- configuration ------------------------------------------------------- */

int wf_config_parse_string(const char* text, wf_config** out);
int wf_config_parse_file(const char* path, wf_config** out);
void wf_config_free(wf_config* cfg);
/* Serialization round-trips: parsing the result reproduces the config. */
int wf_config_serialize(const wf_config* cfg, char** out);

/* Command-line style overrides applied after parsing. */
int wf_config_set_out_dir(wf_config* cfg, const char* dir);
int wf_config_set_seed(wf_config* cfg, unsigned seed);
int wf_config_set_max_stages(wf_config* cfg, int stages);
int wf_config_set_resolution(wf_config* cfg, int resolution);
const char* wf_config_out_dir(const wf_config* cfg);

/* --- construct ----------------------------------------------------------- */

/* Runs the full construction and writes artifacts (run.log, v/w grids,
 * defect_trace.csv, config.txt) into the configured output directory.
 * Deterministic for identical configurations. */
int wf_construct(const wf_config* cfg, int quiet, wf_run** out);
void wf_run_free(wf_run* run);

int wf_run_stage_count(const wf_run* run);
const char* wf_run_phase(const wf_run* run);
double wf_run_final_defect(const wf_run* run);
/* Borrowed pointer into the run handle; valid until wf_run_free. */
int wf_run_defect_trace(const wf_run* run, const double** data, size_t* count);
int wf_run_residual_trace(const wf_run* run, const double** data, size_t* count);

/* --- verify -------------------------------------------------------------- */

/* Reads v/w grids from artifact_dir, writes verify.csv there, and returns
 * the CSV report (weak-Hessian residuals over ten test bumps, lattice
 * defect norms, gradient Hoelder estimates at two resolutions). */
int wf_verify(const wf_config* cfg, const char* artifact_dir, char** csv_out);

/* --- degree -------------------------------------------------------------- */

/* Brouwer degree of the gradient map of the configured v0 over a
 * counterclockwise polygon (poly_xy = x0,y0,x1,y1,... with n_vertices
 * pairs) at target (yx, yy).  Optional rotational perturbation delta
 * (use_delta != 0) and optional test bump (use_bump != 0, centered at
 * (bump_cx, bump_cy) with radius bump_r) for the change-of-variables
 * residual.  Returns a JSON report; an insufficient boundary clearance is
 * reported in-band as degree_defined = false. */
int wf_degree(const wf_config* cfg, const double* poly_xy, int n_vertices, double yx, double yy,
              int use_delta, double delta, int use_bump, double bump_cx, double bump_cy,
              double bump_r, int quad_resolution, char** json_out);

/* --- report -------------------------------------------------------------- */

/* Human-readable summary of a finished run directory. */
int wf_report(const char* artifact_dir, char** text_out);

#ifdef __cplusplus
}
#endif

#endif /* WFORGE_H */
