#ifndef IOCO_H
#define IOCO_H

// C interface to the ioco model-based-testing engine. All types are opaque
// handles; every function that can fail returns an ioco_status and leaves a
// human-readable message in ioco_last_error() (thread-local). Strings
// returned through char** are heap copies; release them with
// ioco_string_free. Handles are released with their matching _free; all
// _free functions accept NULL.
//
// Distinct handles may be used from different threads concurrently; one
// handle must not be shared between threads without external locking.

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ioco_status {
    IOCO_OK = 0,
    IOCO_QUIESCENT = 1,  // ioco_port_receive: no output within the timeout
    IOCO_ERR_INVALID_ARGUMENT = -1,
    IOCO_ERR_PARSE = -2,       // malformed .aut input
    IOCO_ERR_VALIDATION = -3,  // model violates a structural requirement
    IOCO_ERR_IO = -4,          // file system trouble
    IOCO_ERR_TRANSPORT = -5,   // socket or protocol trouble
    IOCO_ERR_RUNTIME = -6,     // anything else (see ioco_last_error)
} ioco_status;

typedef enum ioco_verdict {
    IOCO_VERDICT_COVERAGE_REACHED = 0,
    IOCO_VERDICT_FAIL_UNEXPECTED_OUTPUT = 1,
    IOCO_VERDICT_FAIL_UNEXPECTED_QUIESCENCE = 2,
    IOCO_VERDICT_BUDGET_EXHAUSTED = 3,
} ioco_verdict;

typedef struct ioco_model ioco_model;      // immutable labeled transition system
typedef struct ioco_port ioco_port;        // implementation under test (simulator or TCP)
typedef struct ioco_server ioco_server;    // TCP simulator server
typedef struct ioco_report ioco_report;    // result of one engine run
typedef struct ioco_mutants ioco_mutants;  // list of single-fault model variants

// Message describing the most recent failure on this thread; never NULL.
const char* ioco_last_error(void);

const char* ioco_version(void);

void ioco_string_free(char* s);

// ---- models ----------------------------------------------------------

// Markers and special names used when reading .aut files. Pass NULL fields
// for the defaults: "?" inputs, "!" outputs, tau names "tau,i", delta
// names "delta". Name lists are comma-separated.
typedef struct ioco_aut_conventions {
    const char* input_marker;
    const char* output_marker;
    const char* tau_names;
    const char* delta_names;
} ioco_aut_conventions;

ioco_status ioco_model_from_aut_file(const char* path, const ioco_aut_conventions* conv,
                                     ioco_model** out);
ioco_status ioco_model_from_aut_text(const char* text, const ioco_aut_conventions* conv,
                                     ioco_model** out);

// Canonical form: header line, then transitions sorted by source, label,
// target, LF line ends.
ioco_status ioco_model_to_aut_text(const ioco_model* m, char** out);
ioco_status ioco_model_save_aut(const ioco_model* m, const char* path);

void ioco_model_free(ioco_model* m);

uint32_t ioco_model_state_count(const ioco_model* m);
uint64_t ioco_model_transition_count(const ioco_model* m);

// Summary as JSON: states, transitions, initial, inputs, outputs,
// has_delta, quiescent_states.
ioco_status ioco_model_info_json(const ioco_model* m, char** out);

// Adds the quiescence self-loops required before testing. Fails if the
// model already has delta transitions.
ioco_status ioco_model_delta_completion(const ioco_model* m, ioco_model** out);

// Checks determinism, absence of tau (strict only), strong connectivity,
// internal choice, and delta placement. *report_json gets a JSON array of
// violations (possibly empty); *error_count the number of error-level
// entries. Returns IOCO_OK even when violations were found.
ioco_status ioco_model_validate(const ioco_model* m, int strict, char** report_json,
                                int* error_count);

// ---- generation ------------------------------------------------------

typedef struct ioco_gen_params {
    uint32_t states;             // per component
    uint32_t degree;             // out-edges per skeleton state
    uint32_t outputs_per_input;  // emissions following each input
    uint32_t components;
    uint64_t seed;
    uint32_t max_attempts;
    uint32_t alphabet_size;  // 0 = fresh names per action
} ioco_gen_params;

// Random run-to-completion statespace; retries seeds until the model is
// deterministic and strongly connected. Reports the accepted seed and the
// number of attempts consumed when the pointers are non-NULL.
ioco_status ioco_generate(const ioco_gen_params* params, ioco_model** out,
                          uint64_t* accepted_seed, uint32_t* attempts);

// `count` single-fault variants of m, each behaviorally distinguishable
// from m.
ioco_status ioco_mutants_generate(const ioco_model* m, size_t count, uint64_t seed,
                                  ioco_mutants** out);
size_t ioco_mutants_count(const ioco_mutants* set);
ioco_status ioco_mutants_model(const ioco_mutants* set, size_t index, ioco_model** out);
// Fault description such as "redirect 3 -!out7_1-> 4 to 9"; owned by the
// set, valid until it is freed.
const char* ioco_mutants_description(const ioco_mutants* set, size_t index);
void ioco_mutants_free(ioco_mutants* set);

// ---- implementation ports --------------------------------------------

// In-process simulator of `m`. wall_clock nonzero makes empty-queue
// receives wait out their timeout; zero reports quiescence immediately.
ioco_status ioco_port_simulator(const ioco_model* m, uint64_t seed, int wall_clock,
                                ioco_port** out);

// Client of a running simulator server.
ioco_status ioco_port_tcp(const char* host, uint16_t port, ioco_port** out);

ioco_status ioco_port_send(ioco_port* port, const char* input);

// IOCO_OK: *name_out gets the output name. IOCO_QUIESCENT: *name_out is
// set to NULL.
ioco_status ioco_port_receive(ioco_port* port, uint32_t timeout_ms, char** name_out);

ioco_status ioco_port_reset(ioco_port* port);
void ioco_port_free(ioco_port* port);

// ---- test engine -----------------------------------------------------

typedef struct ioco_run_config {
    int greedy;               // 0 = random input choice, 1 = greedy path-tree
    uint32_t depth;           // greedy lookahead
    double coverage_target;   // fraction of states, in (0, 1]
    uint64_t max_transitions; // 0 = no budget
    uint32_t timeout_millis;  // per receive
    double input_bias;        // P(send) when both directions are open
    uint64_t seed;
} ioco_run_config;

// One online test run of `port` against `m` (delta-completed internally
// when the model has no delta transitions at all).
ioco_status ioco_run(const ioco_model* m, ioco_port* port, const ioco_run_config* cfg,
                     ioco_report** out);

ioco_verdict ioco_report_verdict(const ioco_report* r);
const char* ioco_report_verdict_name(const ioco_report* r);
uint64_t ioco_report_transitions(const ioco_report* r);
uint32_t ioco_report_states_visited(const ioco_report* r);

// Full report as JSON: verdict, transitions_taken, trace, offending
// (absent unless fail), coverage_curve as [transitions, states_visited]
// pairs.
ioco_status ioco_report_to_json(const ioco_report* r, char** out);
void ioco_report_free(ioco_report* r);

// ---- simulator server ------------------------------------------------

// Binds host:port (port 0 picks one) and serves sessions in background
// threads until ioco_server_free. *bound_port reports the actual port when
// non-NULL.
ioco_status ioco_server_start(const ioco_model* m, const char* host, uint16_t port,
                              int wall_clock, uint64_t seed, ioco_server** out,
                              uint16_t* bound_port);
void ioco_server_free(ioco_server* server);

#ifdef __cplusplus
}
#endif

#endif  // IOCO_H
