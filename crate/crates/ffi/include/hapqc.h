#ifndef HAPQC_H
#define HAPQC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HapqcStatus {
  HAPQC_STATUS_OK = 0,
  HAPQC_STATUS_NULL_POINTER = 1,
  HAPQC_STATUS_INVALID_ARGUMENT = 2,
  HAPQC_STATUS_OUT_OF_RANGE = 3,
  HAPQC_STATUS_PARSE_ERROR = 4,
  HAPQC_STATUS_CONFIG_ERROR = 5,
  HAPQC_STATUS_NON_CONVERGENCE = 6,
  HAPQC_STATUS_PANIC = 7,
} HapqcStatus;

typedef enum HapqcChainPattern {
  HAPQC_CHAIN_PATTERN_SINGLE = 0,
  HAPQC_CHAIN_PATTERN_HEX = 1,
} HapqcChainPattern;

typedef struct HapqcCouplings HapqcCouplings;

typedef struct HapqcLattice HapqcLattice;

typedef struct HapqcPlan HapqcPlan;

typedef struct HapqcSequence HapqcSequence;

/**
 * One lattice site; positions in metres.
 */
typedef struct HapqcSite {
  size_t id;
  size_t chain_id;
  size_t plane_index;
  double x;
  double y;
  double z;
} HapqcSite;

/**
 * One coupled pair; `d_hz` signed, `r` in metres, `theta` in radians.
 */
typedef struct HapqcCoupling {
  size_t i;
  size_t j;
  double d_hz;
  double r;
  double theta;
} HapqcCoupling;

typedef struct HapqcGateFidelity {
  double retained_hz;
  double entangle_time_s;
  double gate_time_s;
  double ideal_fidelity;
  double cluster_fidelity;
} HapqcGateFidelity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *hapqc_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void hapqc_string_free(char *s);

/**
 * Secular dipolar coupling constant (Hz) at distance `r` (m) and angle
 * `theta` (rad) to the field.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HapqcStatus hapqc_dipolar_coupling_hz(double r, double theta, double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HapqcStatus hapqc_plane_splitting_hz(double gradient_t_per_m,
                                          double chain_spacing_m,
                                          double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HapqcStatus hapqc_addressable_planes(double bandwidth_hz, double splitting_hz, uint64_t *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HapqcStatus hapqc_physical_plane_limit(double thickness_m,
                                            double chain_spacing_m,
                                            uint64_t *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum HapqcStatus hapqc_spins_per_plane(double lateral_x_m,
                                       double lateral_y_m,
                                       double chain_separation_m,
                                       double *out);

/**
 * Builds a lattice with the field along z.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HapqcStatus hapqc_lattice_new(double chain_spacing_m,
                                   double chain_separation_m,
                                   size_t n_planes,
                                   enum HapqcChainPattern pattern,
                                   struct HapqcLattice **out);

/**
 * Builds a lattice from `n_chains` in-plane offsets given as `x0, y0, x1,
 * y1, …` in metres.
 *
 * # Safety
 * `offsets` must point to `2 * n_chains` doubles; `out` must be valid for
 * writes.
 */
enum HapqcStatus hapqc_lattice_new_explicit(double chain_spacing_m,
                                            double chain_separation_m,
                                            size_t n_planes,
                                            const double *offsets,
                                            size_t n_chains,
                                            struct HapqcLattice **out);

/**
 * Number of sites; 0 for a null handle.
 *
 * # Safety
 * `lattice` must be null or a live handle.
 */
size_t hapqc_lattice_len(const struct HapqcLattice *lattice);

/**
 * # Safety
 * `lattice` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_lattice_site(const struct HapqcLattice *lattice,
                                    size_t index,
                                    struct HapqcSite *out);

/**
 * # Safety
 * `lattice` must be null or a handle not yet freed.
 */
void hapqc_lattice_free(struct HapqcLattice *lattice);

/**
 * Coupling table of every pair with `|d| >= cutoff_hz`, strongest first.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_couplings_new(const struct HapqcLattice *lattice,
                                     double cutoff_hz,
                                     struct HapqcCouplings **out);

/**
 * # Safety
 * `table` must be null or a live handle.
 */
size_t hapqc_couplings_len(const struct HapqcCouplings *table);

/**
 * # Safety
 * `table` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_couplings_entry(const struct HapqcCouplings *table,
                                       size_t index,
                                       struct HapqcCoupling *out);

/**
 * # Safety
 * `table` must be null or a handle not yet freed.
 */
void hapqc_couplings_free(struct HapqcCouplings *table);

/**
 * Device plan from configuration text. An infeasible plan is still a
 * success; query it with [`hapqc_plan_feasible`].
 *
 * # Safety
 * `config` must be a nul-terminated string; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_plan_from_config(const char *config, struct HapqcPlan **out);

/**
 * # Safety
 * `plan` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_plan_feasible(const struct HapqcPlan *plan, bool *out);

/**
 * # Safety
 * `plan` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_plan_addressable_planes(const struct HapqcPlan *plan, uint64_t *out);

/**
 * Full-precision JSON for the plan; free with [`hapqc_string_free`].
 *
 * # Safety
 * `plan` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_plan_to_json(const struct HapqcPlan *plan, char **out);

/**
 * # Safety
 * `plan` must be null or a handle not yet freed.
 */
void hapqc_plan_free(struct HapqcPlan *plan);

/**
 * Parses the line-oriented sequence format.
 *
 * # Safety
 * `source` must be a nul-terminated string; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_sequence_parse(const char *source, struct HapqcSequence **out);

/**
 * # Safety
 * `seq` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_sequence_cycle_time(const struct HapqcSequence *seq, double *out);

/**
 * # Safety
 * `seq` must be a live handle; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_sequence_to_text(const struct HapqcSequence *seq, char **out);

/**
 * # Safety
 * `seq` must be null or a handle not yet freed.
 */
void hapqc_sequence_free(struct HapqcSequence *seq);

/**
 * CNOT between planes `plane_a` (control) and `plane_b` of the cluster in
 * the configuration text.
 *
 * # Safety
 * `config` must be a nul-terminated string; `out` must be valid for writes.
 */
enum HapqcStatus hapqc_cnot_fidelity(const char *config,
                                     size_t plane_a,
                                     size_t plane_b,
                                     struct HapqcGateFidelity *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAPQC_H */
