/* C interface to the orthogonal-magnetic-Hamiltonian toolkit.
 *
 * All entry points are thread-safe; error messages are thread-local.  Strings
 * returned as char* are heap copies owned by the caller and released with
 * omh_string_free.  Handles are opaque and released with their _free pair.
 */
#ifndef OMH_H
#define OMH_H

#ifdef __cplusplus
extern "C" {
#endif

/* status codes */
#define OMH_OK 0
#define OMH_EUSAGE 1      /* null handle / null argument */
#define OMH_EPARSE 2      /* expression or JSON parse failure */
#define OMH_EDOMAIN 3     /* evaluation outside the mathematical domain */
#define OMH_ESINGULAR 4   /* singular operator, matrix, or spectrum */
#define OMH_ECONSTRAINT 5 /* declared inequality or structure violated */
#define OMH_ECONFIG 6     /* unknown model, parameter, slot, gauge, option */
#define OMH_EDIVERGED 7   /* integrator left the domain or failed to solve */
#define OMH_EINTERNAL 8

typedef struct omh_model omh_model;
typedef struct omh_report omh_report;

const char* omh_version(void);

/* message from the most recent failing call on this thread; never NULL */
const char* omh_last_error(void);

void omh_string_free(char* s);

/* catalog of built-in models: ids, titles, parameters with defaults,
 * function slots with fallbacks, gauge menus */
char* omh_catalog_json(void);

/* spec_json: {"model": "<id>", "params": {name: number, ...},
 *             "functions": {slot: "expression", ...}, "gauge": "<name>"}
 * params/functions/gauge are optional. */
int omh_model_create(const char* spec_json, omh_model** out);
void omh_model_free(omh_model* m);

/* the resolved model: id, title, gauge, parameters, function sources,
 * declared integrals/operators/charts/attachments, simulation defaults */
char* omh_model_info_json(const omh_model* m);

/* options_json (optional fields): {"seed": u64, "samples": int,
 *  "threads": int, "tolerances": {class: value, ...}}
 * NULL or "" runs the defaults.  A report is produced even when checks fail;
 * the return code is OMH_OK unless the run itself could not execute. */
int omh_verify(const omh_model* m, const char* options_json, omh_report** out);

int omh_report_passed(const omh_report* r); /* 1 all passed, 0 otherwise */

/* timestamp: verbatim value for the trailing "timestamp" field; pass NULL or
 * "" to omit it (reports are then byte-identical across runs) */
char* omh_report_json(const omh_report* r, const char* timestamp);
void omh_report_free(omh_report* r);

/* options_json (optional fields): {"dt": s, "t_final": s, "x0": [6 numbers],
 *  "newton_tol": v}.  Writes the trajectory CSV to csv_path when csv_path is
 * non-NULL and nonempty.  On success *summary_json holds per-integral drift
 * statistics. */
int omh_simulate(const omh_model* m, const char* options_json,
                 const char* csv_path, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* OMH_H */
