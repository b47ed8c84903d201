#include "ioco/ioco.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "../core/aut.hpp"
#include "../core/engine.hpp"
#include "../core/generator.hpp"
#include "../core/iolts.hpp"
#include "../core/rng.hpp"
#include "../core/simulator.hpp"
#include "../core/tcp.hpp"

using nlohmann::json;

struct ioco_model {
    ioco::Iolts m;
};

struct ioco_port {
    std::unique_ptr<ioco::SutPort> p;
};

struct ioco_server {
    std::unique_ptr<ioco::TcpServer> s;
};

struct ioco_report {
    ioco::RunReport r;
};

struct ioco_mutants {
    std::vector<std::pair<ioco::Iolts, ioco::FaultSpec>> items;
    std::vector<std::string> descriptions;
};

namespace {

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ioco_status fail(ioco_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Runs the body and converts every escaping exception into a status code;
// nothing may propagate across the C boundary.
template <class F>
ioco_status guarded(F&& body) {
    try {
        return body();
    } catch (const ioco::ParseError& e) {
        return fail(IOCO_ERR_PARSE, e.what());
    } catch (const ioco::TransportError& e) {
        return fail(IOCO_ERR_TRANSPORT, e.what());
    } catch (const ioco::IocoError& e) {
        return fail(IOCO_ERR_RUNTIME, e.what());
    } catch (const std::exception& e) {
        return fail(IOCO_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(IOCO_ERR_RUNTIME, "unknown error");
    }
}

ioco::AutConventions make_conventions(const ioco_aut_conventions* conv) {
    ioco::AutConventions out;
    if (conv == nullptr) return out;
    auto split_names = [](const char* csv) {
        std::vector<std::string> names;
        std::stringstream stream(csv);
        std::string item;
        while (std::getline(stream, item, ','))
            if (!item.empty()) names.push_back(item);
        return names;
    };
    if (conv->input_marker != nullptr) out.input_marker = conv->input_marker;
    if (conv->output_marker != nullptr) out.output_marker = conv->output_marker;
    if (conv->tau_names != nullptr) out.tau_names = split_names(conv->tau_names);
    if (conv->delta_names != nullptr) out.delta_names = split_names(conv->delta_names);
    return out;
}

json report_to_json(const ioco::RunReport& r) {
    json out;
    out["verdict"] = ioco::verdict_name(r.verdict);
    out["transitions_taken"] = r.transitions_taken;
    json trace = json::array();
    for (const auto& label : r.trace) trace.push_back(ioco::to_string(label));
    out["trace"] = std::move(trace);
    if (r.offending) out["offending"] = ioco::to_string(*r.offending);
    json curve = json::array();
    for (const auto& point : r.coverage_curve)
        curve.push_back(json::array({point.transitions, point.states_visited}));
    out["coverage_curve"] = std::move(curve);
    out["states_visited"] =
        r.coverage_curve.empty() ? 0u : r.coverage_curve.back().states_visited;
    return out;
}

}  // namespace

extern "C" {

const char* ioco_last_error(void) { return g_last_error.c_str(); }

const char* ioco_version(void) { return "0.1.0"; }

void ioco_string_free(char* s) { std::free(s); }

ioco_status ioco_model_from_aut_text(const char* text, const ioco_aut_conventions* conv,
                                     ioco_model** out) {
    if (text == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "text and out must be non-NULL");
    return guarded([&] {
        *out = new ioco_model{ioco::parse_aut(text, make_conventions(conv))};
        return IOCO_OK;
    });
}

ioco_status ioco_model_from_aut_file(const char* path, const ioco_aut_conventions* conv,
                                     ioco_model** out) {
    if (path == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "path and out must be non-NULL");
    std::ifstream file(path, std::ios::binary);
    if (!file) return fail(IOCO_ERR_IO, std::string("cannot open ") + path);
    std::stringstream text;
    text << file.rdbuf();
    return ioco_model_from_aut_text(text.str().c_str(), conv, out);
}

ioco_status ioco_model_to_aut_text(const ioco_model* m, char** out) {
    if (m == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        *out = dup_string(ioco::write_aut(m->m));
        return *out != nullptr ? IOCO_OK : fail(IOCO_ERR_RUNTIME, "out of memory");
    });
}

ioco_status ioco_model_save_aut(const ioco_model* m, const char* path) {
    if (m == nullptr || path == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and path must be non-NULL");
    return guarded([&] {
        std::ofstream file(path, std::ios::binary);
        if (!file) return fail(IOCO_ERR_IO, std::string("cannot open ") + path);
        file << ioco::write_aut(m->m);
        file.flush();
        if (!file) return fail(IOCO_ERR_IO, std::string("cannot write ") + path);
        return IOCO_OK;
    });
}

void ioco_model_free(ioco_model* m) { delete m; }

uint32_t ioco_model_state_count(const ioco_model* m) {
    return m == nullptr ? 0 : static_cast<uint32_t>(m->m.state_count());
}

uint64_t ioco_model_transition_count(const ioco_model* m) {
    return m == nullptr ? 0 : static_cast<uint64_t>(m->m.transition_count());
}

ioco_status ioco_model_info_json(const ioco_model* m, char** out) {
    if (m == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        std::size_t quiescent = 0;
        for (std::size_t q = 0; q < m->m.state_count(); ++q)
            if (m->m.quiescent(static_cast<ioco::StateId>(q))) ++quiescent;
        json info;
        info["states"] = m->m.state_count();
        info["initial"] = m->m.initial();
        info["transitions"] = m->m.transition_count();
        info["inputs"] = m->m.inputs();
        info["outputs"] = m->m.outputs();
        info["has_delta"] = m->m.has_delta();
        info["quiescent_states"] = quiescent;
        *out = dup_string(info.dump());
        return *out != nullptr ? IOCO_OK : fail(IOCO_ERR_RUNTIME, "out of memory");
    });
}

ioco_status ioco_model_delta_completion(const ioco_model* m, ioco_model** out) {
    if (m == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        *out = new ioco_model{ioco::delta_completion(m->m)};
        return IOCO_OK;
    });
}

ioco_status ioco_model_validate(const ioco_model* m, int strict, char** report_json,
                                int* error_count) {
    if (m == nullptr || report_json == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and report_json must be non-NULL");
    return guarded([&] {
        const auto violations = ioco::validate(m->m, strict != 0);
        json report = json::array();
        int errors = 0;
        for (const auto& v : violations) {
            if (v.severity == ioco::Severity::Error) ++errors;
            report.push_back({{"code", ioco::violation_code_name(v.code)},
                              {"severity", v.severity == ioco::Severity::Error ? "error" : "warning"},
                              {"state", v.state},
                              {"label", v.label},
                              {"message", v.message}});
        }
        *report_json = dup_string(report.dump());
        if (*report_json == nullptr) return fail(IOCO_ERR_RUNTIME, "out of memory");
        if (error_count != nullptr) *error_count = errors;
        return IOCO_OK;
    });
}

ioco_status ioco_generate(const ioco_gen_params* params, ioco_model** out,
                          uint64_t* accepted_seed, uint32_t* attempts) {
    if (params == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "params and out must be non-NULL");
    return guarded([&] {
        ioco::GenParams p;
        p.states = params->states;
        p.degree = params->degree;
        p.outputs_per_input = params->outputs_per_input;
        p.components = params->components;
        p.seed = params->seed;
        p.max_attempts = params->max_attempts == 0 ? 32 : params->max_attempts;
        p.alphabet_size = params->alphabet_size;
        ioco::GenResult result = ioco::gen_model(p);
        if (accepted_seed != nullptr) *accepted_seed = result.accepted_seed;
        if (attempts != nullptr) *attempts = result.attempts;
        *out = new ioco_model{std::move(result.model)};
        return IOCO_OK;
    });
}

ioco_status ioco_mutants_generate(const ioco_model* m, size_t count, uint64_t seed,
                                  ioco_mutants** out) {
    if (m == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        auto rng = ioco::make_rng(seed);
        auto items = ioco::gen_mutants(m->m, count, rng);
        auto set = std::make_unique<ioco_mutants>();
        set->descriptions.reserve(items.size());
        for (const auto& [model, fault] : items) set->descriptions.push_back(fault.describe());
        set->items = std::move(items);
        *out = set.release();
        return IOCO_OK;
    });
}

size_t ioco_mutants_count(const ioco_mutants* set) { return set == nullptr ? 0 : set->items.size(); }

ioco_status ioco_mutants_model(const ioco_mutants* set, size_t index, ioco_model** out) {
    if (set == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "set and out must be non-NULL");
    if (index >= set->items.size()) return fail(IOCO_ERR_INVALID_ARGUMENT, "mutant index out of range");
    return guarded([&] {
        *out = new ioco_model{set->items[index].first};
        return IOCO_OK;
    });
}

const char* ioco_mutants_description(const ioco_mutants* set, size_t index) {
    if (set == nullptr || index >= set->descriptions.size()) return "";
    return set->descriptions[index].c_str();
}

void ioco_mutants_free(ioco_mutants* set) { delete set; }

ioco_status ioco_port_simulator(const ioco_model* m, uint64_t seed, int wall_clock,
                                ioco_port** out) {
    if (m == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model and out must be non-NULL");
    return guarded([&] {
        const auto mode = wall_clock != 0 ? ioco::TimeMode::WallClock : ioco::TimeMode::Logical;
        *out = new ioco_port{std::make_unique<ioco::Simulator>(m->m, seed, mode)};
        return IOCO_OK;
    });
}

ioco_status ioco_port_tcp(const char* host, uint16_t port, ioco_port** out) {
    if (host == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "host and out must be non-NULL");
    return guarded([&] {
        *out = new ioco_port{std::make_unique<ioco::TcpPort>(host, port)};
        return IOCO_OK;
    });
}

ioco_status ioco_port_send(ioco_port* port, const char* input) {
    if (port == nullptr || input == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "port and input must be non-NULL");
    return guarded([&] {
        port->p->send(input);
        return IOCO_OK;
    });
}

ioco_status ioco_port_receive(ioco_port* port, uint32_t timeout_ms, char** name_out) {
    if (port == nullptr || name_out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "port and name_out must be non-NULL");
    return guarded([&] {
        const auto got = port->p->receive(std::chrono::milliseconds(timeout_ms));
        if (!got) {
            *name_out = nullptr;
            return IOCO_QUIESCENT;
        }
        *name_out = dup_string(*got);
        return *name_out != nullptr ? IOCO_OK : fail(IOCO_ERR_RUNTIME, "out of memory");
    });
}

ioco_status ioco_port_reset(ioco_port* port) {
    if (port == nullptr) return fail(IOCO_ERR_INVALID_ARGUMENT, "port must be non-NULL");
    return guarded([&] {
        port->p->reset();
        return IOCO_OK;
    });
}

void ioco_port_free(ioco_port* port) { delete port; }

ioco_status ioco_run(const ioco_model* m, ioco_port* port, const ioco_run_config* cfg,
                     ioco_report** out) {
    if (m == nullptr || port == nullptr || cfg == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model, port, cfg, and out must be non-NULL");
    return guarded([&] {
        ioco::EngineConfig config;
        config.strategy = cfg->greedy != 0 ? ioco::StrategyKind::Greedy : ioco::StrategyKind::Random;
        config.depth = cfg->depth == 0 ? 5 : cfg->depth;
        config.coverage_target = cfg->coverage_target;
        config.max_transitions = cfg->max_transitions;
        config.timeout_millis = cfg->timeout_millis;
        config.input_bias = cfg->input_bias;
        config.seed = cfg->seed;
        *out = new ioco_report{ioco::run(m->m, *port->p, config)};
        return IOCO_OK;
    });
}

ioco_verdict ioco_report_verdict(const ioco_report* r) {
    if (r == nullptr) return IOCO_VERDICT_BUDGET_EXHAUSTED;
    switch (r->r.verdict) {
        case ioco::Verdict::CoverageReached: return IOCO_VERDICT_COVERAGE_REACHED;
        case ioco::Verdict::FailUnexpectedOutput: return IOCO_VERDICT_FAIL_UNEXPECTED_OUTPUT;
        case ioco::Verdict::FailUnexpectedQuiescence:
            return IOCO_VERDICT_FAIL_UNEXPECTED_QUIESCENCE;
        case ioco::Verdict::BudgetExhausted: return IOCO_VERDICT_BUDGET_EXHAUSTED;
    }
    return IOCO_VERDICT_BUDGET_EXHAUSTED;
}

const char* ioco_report_verdict_name(const ioco_report* r) {
    return r == nullptr ? "unknown" : ioco::verdict_name(r->r.verdict);
}

uint64_t ioco_report_transitions(const ioco_report* r) {
    return r == nullptr ? 0 : r->r.transitions_taken;
}

uint32_t ioco_report_states_visited(const ioco_report* r) {
    if (r == nullptr || r->r.coverage_curve.empty()) return 0;
    return r->r.coverage_curve.back().states_visited;
}

ioco_status ioco_report_to_json(const ioco_report* r, char** out) {
    if (r == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "report and out must be non-NULL");
    return guarded([&] {
        *out = dup_string(report_to_json(r->r).dump(2));
        return *out != nullptr ? IOCO_OK : fail(IOCO_ERR_RUNTIME, "out of memory");
    });
}

void ioco_report_free(ioco_report* r) { delete r; }

ioco_status ioco_server_start(const ioco_model* m, const char* host, uint16_t port,
                              int wall_clock, uint64_t seed, ioco_server** out,
                              uint16_t* bound_port) {
    if (m == nullptr || host == nullptr || out == nullptr)
        return fail(IOCO_ERR_INVALID_ARGUMENT, "model, host, and out must be non-NULL");
    return guarded([&] {
        const auto mode = wall_clock != 0 ? ioco::TimeMode::WallClock : ioco::TimeMode::Logical;
        auto server = std::make_unique<ioco::TcpServer>(m->m, mode, seed);
        const uint16_t actual = server->listen(host, port);
        server->start();
        if (bound_port != nullptr) *bound_port = actual;
        *out = new ioco_server{std::move(server)};
        return IOCO_OK;
    });
}

void ioco_server_free(ioco_server* server) { delete server; }

}  // extern "C"
