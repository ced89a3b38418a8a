#ifndef PTSYM_H
#define PTSYM_H

#include <stdbool.h>
#include <stddef.h>

// Result of every fallible call.
typedef enum PtsymStatus {
  PTSYM_STATUS_OK = 0,
  PTSYM_STATUS_NULL_POINTER = 1,
  PTSYM_STATUS_INVALID_ARGUMENT = 2,
  // Bad configuration or model definition.
  PTSYM_STATUS_CONFIG = 3,
  // A frame axiom failed.
  PTSYM_STATUS_FRAME_AXIOM = 4,
  // A numerical failure: non-convergence, overflow, broken symmetry.
  PTSYM_STATUS_NUMERIC = 5,
  PTSYM_STATUS_IO = 6,
  // The requested value does not exist for this run.
  PTSYM_STATUS_NO_DATA = 7,
  // A Rust panic was caught at the boundary.
  PTSYM_STATUS_PANIC = 8,
} PtsymStatus;

// A validated CPT frame.
typedef struct PtsymFrame PtsymFrame;

// A completed scenario run.
typedef struct PtsymRun PtsymRun;

// Symmetry checks of one Hamiltonian against one frame.
typedef struct PtsymSymmetry {
  bool pt_symmetric;
  bool cpt_hermitian;
  bool unbroken;
  double max_eigen_imag;
  double pt_residual;
  double hermitian_residual;
  double eigenspace_residual;
} PtsymSymmetry;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *ptsym_last_error(void);

// Library version as a static NUL-terminated string.
const char *ptsym_version(void);

// Validates `C`, `P` and `T = K·conj(·)` and returns a frame handle.
// `k` may be null for plain complex conjugation.
enum PtsymStatus ptsym_frame_new(size_t dim,
                                 const double *c,
                                 const double *p,
                                 const double *k,
                                 double tol,
                                 struct PtsymFrame **out);

// The two-level frame `C = [[i·tan α, sec α], [sec α, −i·tan α]]`,
// `P = swap`, `T = conj`.
enum PtsymStatus ptsym_frame_two_level(double alpha, double tol, struct PtsymFrame **out);

// Releases a frame; null is ignored.
void ptsym_frame_free(struct PtsymFrame *frame);

// Dimension of the frame, 0 for null.
size_t ptsym_frame_dim(const struct PtsymFrame *frame);

// Writes the metric `P·C` into `out` (`2·dim·dim` doubles).
enum PtsymStatus ptsym_frame_metric(const struct PtsymFrame *frame, double *out);

// `(x|y) = x†·P·C·y`, written to `out_re` and `out_im`.
enum PtsymStatus ptsym_frame_inner(const struct PtsymFrame *frame,
                                   const double *x,
                                   const double *y,
                                   double *out_re,
                                   double *out_im);

// Constants `lo`, `hi` with `lo·‖x‖ ≤ ‖x‖_CPT ≤ hi·‖x‖`.
enum PtsymStatus ptsym_frame_norm_bounds(const struct PtsymFrame *frame, double *lo, double *hi);

// PT-symmetry, CPT-Hermiticity and unbroken-ness of `h` on this frame.
enum PtsymStatus ptsym_symmetry_check(const struct PtsymFrame *frame,
                                      const double *h,
                                      double tol,
                                      struct PtsymSymmetry *out);

// Runs a scenario given as TOML text and writes its artifacts under
// `out_dir` (or the config's `output.dir` when null). A run whose checks
// fail still returns `Ok`; query [`ptsym_run_passed`].
enum PtsymStatus ptsym_run_toml(const char *toml, const char *out_dir, struct PtsymRun **out);

// Like [`ptsym_run_toml`] with the TOML read from `path`.
enum PtsymStatus ptsym_run_file(const char *path, const char *out_dir, struct PtsymRun **out);

// Frame and symmetry checks on every grid point without evolving; writes
// whether all passed to `passed`.
enum PtsymStatus ptsym_validate_toml(const char *toml, bool *passed);

// Releases a run; null is ignored.
void ptsym_run_free(struct PtsymRun *run);

// True when every enabled check passed; false for null.
bool ptsym_run_passed(const struct PtsymRun *run);

// Largest CPT-norm drift along the trajectory.
enum PtsymStatus ptsym_run_norm_drift(const struct PtsymRun *run, double *out);

// Total adiabatic bound `V(T)`; `NoData` when the adiabatic check was off.
enum PtsymStatus ptsym_run_v_total(const struct PtsymRun *run, double *out);

// Largest fidelity loss; `NoData` when the adiabatic check was off.
enum PtsymStatus ptsym_run_max_loss(const struct PtsymRun *run, double *out);

// The run summary as JSON, owned by the run handle; null for null.
const char *ptsym_run_summary_json(const struct PtsymRun *run);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PTSYM_H */
