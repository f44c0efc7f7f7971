#ifndef WOTW_H
#define WOTW_H

/* C interface to the nested / adapted optimal transport library.
 *
 * Objects cross the boundary as opaque handles created from JSON text and
 * released with the matching _free call.  Computations return WOTW_OK and a
 * heap JSON (or CSV) string in *out, to be released with wotw_string_free.
 * On failure they return a nonzero code and leave a message in
 * wotw_last_error() for the calling thread.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define WOTW_OK 0
#define WOTW_ERR_VALIDATION 2 /* parse error or violated input invariant */
#define WOTW_ERR_IO 3         /* missing or unreadable file */
#define WOTW_ERR_INTERNAL 4   /* solver failure */

typedef struct wotw_nested wotw_nested; /* measure over measures, finite depth */
typedef struct wotw_tree wotw_tree;     /* scenario tree of a discrete-time process */
typedef struct wotw_table wotw_table;   /* functional given on a finite family */

const char* wotw_version(void);
const char* wotw_last_error(void);
void wotw_string_free(char* s);

/* Nested measure JSON:
 *   depth > 1: {"depth": N, "weights": [...], "children": [node, ...]}
 *   depth = 1: {"depth": 1, "weights": [...], "points": [[x...], ...]}
 */
int wotw_nested_parse(const char* json, wotw_nested** out);
int wotw_nested_read(const char* path, wotw_nested** out);
int wotw_nested_to_json(const wotw_nested* p, char** json_out);
void wotw_nested_free(wotw_nested* p);

/* Scenario tree JSON: {"stages": N, "dim": d, "roots": [node, ...]} with
 * node = {"value": [x...], "weight": w, "children": [node, ...]}. */
int wotw_tree_parse(const char* json, wotw_tree** out);
int wotw_tree_read(const char* path, wotw_tree** out);
int wotw_tree_to_json(const wotw_tree* t, char** json_out);
void wotw_tree_free(wotw_tree* t);

/* Functional table JSON:
 * {"depth": N, "entries": [{"support": <nested measure>, "value": v}, ...]}
 * where value is a number or the string "inf". */
int wotw_table_parse(const char* json, wotw_table** out);
int wotw_table_read(const char* path, wotw_table** out);
void wotw_table_free(wotw_table* t);

/* Exact transport between two depth-1 measures.  cost is "sqdist" or "dot";
 * maximize flips the sense.  want_plan includes the full plan in the output. */
int wotw_ot(const wotw_nested* mu, const wotw_nested* nu, const char* cost,
            int maximize, int want_plan, char** json_out);

/* Iterated max-covariance / nested distance between equal-depth measures. */
int wotw_nested_mc(const wotw_nested* p, const wotw_nested* q, char** json_out);
int wotw_nested_w2(const wotw_nested* p, const wotw_nested* q, char** json_out);

/* Adapted distance between scenario trees, canonicalized at merge_tol first.
 * check_isometry additionally recomputes the value through the nested-measure
 * encoding and reports the residual (quadratic extra work). */
int wotw_adapted_aw2(const wotw_tree* a, const wotw_tree* b, double merge_tol,
                     int threads, int check_isometry, char** json_out);
int wotw_adapted_canon(const wotw_tree* t, double merge_tol, char** json_out);

/* Conjugation diagnostics across the table's family, and the randomized
 * transport-order test between two nested measures. */
int wotw_convexity_transform(const wotw_table* phi, char** json_out);
int wotw_convexity_order(const wotw_nested* p, const wotw_nested* q, int probes,
                         uint64_t seed, char** json_out);

/* Spread of the optimal-plan family for squared-distance transport between
 * depth-1 measures; zero means unique Monge solution. */
int wotw_tau(const wotw_nested* mu, const wotw_nested* nu, char** json_out);
int wotw_tau_r(const wotw_nested* mu, double radius, int targets, uint64_t seed,
               char** json_out);

/* End-to-end deterministic tau sweep.  config_json keys (all optional):
 * samples, targets, grid, params, dim, atoms, seed, kind ("random" | "dirac"). */
int wotw_experiment(const char* config_json, char** json_out);

/* Seeded samplers.  Sheet output carries the full value lattice; occupation
 * output is measure JSON (nested when blocks are given, depth-1 otherwise);
 * the Q-Wiener sampler emits CSV with one column per retained mode. */
int wotw_sample_sheet(int params, int dim, int grid, uint64_t seed,
                      uint64_t stream, char** json_out);
int wotw_sample_occupation(int params, int dim, int grid, const int* blocks,
                           int n_blocks, uint64_t seed, uint64_t stream,
                           char** json_out);
int wotw_sample_qwiener(int grid, int modes, uint64_t seed, char** csv_out);

/* Two-stage analytic worked example: adapted transport whose optimal stage-1
 * map is two-to-one, so no reverse map exists.  n stage-1 atoms, m per
 * conditional. */
int wotw_two_to_one(int n, int m, int threads, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* WOTW_H */
