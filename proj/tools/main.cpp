// ioco-mbt: command-line front end over the ioco shared library. Model
// generation, validation and conversion, a TCP simulator server, single
// engine runs, and the two benchmark families (mutant detection speed,
// state-coverage speed) with CSV/JSON output and a gnuplot script.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "ioco/ioco.h"
#include "json.hpp"

using nlohmann::json;

namespace {

// ------------------------------------------------------------- plumbing --

[[noreturn]] void die(const std::string& message) {
    std::fprintf(stderr, "ioco-mbt: %s\n", message.c_str());
    std::exit(1);
}

void check(ioco_status status, const std::string& context) {
    if (status < 0) die(context + ": " + ioco_last_error());
}

struct ModelDeleter {
    void operator()(ioco_model* m) const { ioco_model_free(m); }
};
struct PortDeleter {
    void operator()(ioco_port* p) const { ioco_port_free(p); }
};
struct ReportDeleter {
    void operator()(ioco_report* r) const { ioco_report_free(r); }
};
struct MutantsDeleter {
    void operator()(ioco_mutants* s) const { ioco_mutants_free(s); }
};
struct ServerDeleter {
    void operator()(ioco_server* s) const { ioco_server_free(s); }
};
using ModelPtr = std::unique_ptr<ioco_model, ModelDeleter>;
using PortPtr = std::unique_ptr<ioco_port, PortDeleter>;
using ReportPtr = std::unique_ptr<ioco_report, ReportDeleter>;
using MutantsPtr = std::unique_ptr<ioco_mutants, MutantsDeleter>;
using ServerPtr = std::unique_ptr<ioco_server, ServerDeleter>;

std::string take_string(char* s) {
    std::string out = s != nullptr ? s : "";
    ioco_string_free(s);
    return out;
}

// Cell seeds are derived, never sequential, so adding a run or a model
// does not shift every other cell's randomness (splitmix64 finisher).
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t cell_seed(std::uint64_t master, std::uint64_t model, std::uint64_t strategy,
                        std::uint64_t run) {
    return mix64(mix64(mix64(mix64(master) ^ model) ^ strategy) ^ run);
}

// Label conventions for reading foreign .aut files.
struct ConvFlags {
    std::string input_marker = "?";
    std::string output_marker = "!";
    std::string tau_names = "tau,i";
    std::string delta_names = "delta";

    ioco_aut_conventions to_c() const {
        return {input_marker.c_str(), output_marker.c_str(), tau_names.c_str(),
                delta_names.c_str()};
    }
};

void add_conv_flags(CLI::App* cmd, ConvFlags& conv) {
    cmd->add_option("--input-marker", conv.input_marker, "Label prefix marking inputs")
        ->capture_default_str();
    cmd->add_option("--output-marker", conv.output_marker, "Label prefix marking outputs")
        ->capture_default_str();
    cmd->add_option("--tau-names", conv.tau_names, "Comma-separated internal-action names")
        ->capture_default_str();
    cmd->add_option("--delta-names", conv.delta_names, "Comma-separated quiescence names")
        ->capture_default_str();
}

ModelPtr load_model(const std::string& path, const ConvFlags& conv) {
    ioco_model* raw = nullptr;
    const auto c = conv.to_c();
    check(ioco_model_from_aut_file(path.c_str(), &c, &raw), path);
    return ModelPtr(raw);
}

bool model_has_delta(const ioco_model* m) {
    char* info = nullptr;
    check(ioco_model_info_json(m, &info), "model info");
    return json::parse(take_string(info)).at("has_delta").get<bool>();
}

// Benchmarks need quiescence loops; external files may lack them.
ModelPtr ensure_delta(ModelPtr m) {
    if (model_has_delta(m.get())) return m;
    ioco_model* completed = nullptr;
    check(ioco_model_delta_completion(m.get(), &completed), "delta completion");
    return ModelPtr(completed);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) die("cannot write " + path);
    out << content;
    if (!out.flush()) die("short write to " + path);
}

// ------------------------------------------------------- shared options --

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
    const char* value = std::getenv(name);
    return value != nullptr ? std::strtoull(value, nullptr, 10) : fallback;
}

std::string env_str(const char* name, std::string fallback) {
    const char* value = std::getenv(name);
    return value != nullptr ? value : std::move(fallback);
}

// Flags shared by the bench commands. Precedence, weakest first: built-in
// default, IOCO_* environment, JSON config file, explicit flag.
struct BenchCommon {
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::string out_dir = ".";
    std::string format = "csv";
    std::string config_path;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
    CLI::Option* out_dir_opt = nullptr;
    CLI::Option* format_opt = nullptr;

    void add_flags(CLI::App* cmd) {
        seed = env_u64("IOCO_SEED", seed);
        jobs = static_cast<unsigned>(env_u64("IOCO_JOBS", jobs));
        out_dir = env_str("IOCO_OUT_DIR", out_dir);
        format = env_str("IOCO_FORMAT", format);
        seed_opt = cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
        jobs_opt = cmd->add_option("--jobs", jobs, "Parallel benchmark cells")
                       ->capture_default_str();
        out_dir_opt = cmd->add_option("--out-dir", out_dir, "Directory for result files")
                          ->capture_default_str();
        format_opt = cmd->add_option("--format", format, "Result file format")
                         ->check(CLI::IsMember({"csv", "json"}))
                         ->capture_default_str();
        cmd->add_option("--config", config_path, "JSON benchmark spec file");
    }

    json load_config() {
        if (config_path.empty()) return json::object();
        std::ifstream in(config_path);
        if (!in) die("cannot read config " + config_path);
        json cfg;
        try {
            in >> cfg;
        } catch (const std::exception& e) {
            die(config_path + ": " + e.what());
        }
        if (seed_opt->count() == 0 && cfg.contains("seed")) seed = cfg["seed"].get<std::uint64_t>();
        if (jobs_opt->count() == 0 && cfg.contains("jobs")) jobs = cfg["jobs"].get<unsigned>();
        if (out_dir_opt->count() == 0 && cfg.contains("out_dir"))
            out_dir = cfg["out_dir"].get<std::string>();
        if (format_opt->count() == 0 && cfg.contains("format"))
            format = cfg["format"].get<std::string>();
        return cfg;
    }
};

struct StrategyCfg {
    std::string name;  // "greedy" or "random"
    std::uint32_t depth = 5;
    double input_bias = 1.0;
};

std::vector<StrategyCfg> resolve_strategies(const json& cfg, std::uint32_t depth, double bias) {
    std::vector<StrategyCfg> out;
    if (cfg.contains("strategies")) {
        for (const auto& entry : cfg["strategies"]) {
            StrategyCfg s;
            s.name = entry.at("name").get<std::string>();
            if (s.name != "greedy" && s.name != "random")
                die("strategy name must be greedy or random, got " + s.name);
            s.depth = entry.value("depth", depth);
            s.input_bias = entry.value("input_bias", bias);
            out.push_back(std::move(s));
        }
        if (out.empty()) die("config strategies list is empty");
        return out;
    }
    out.push_back({"greedy", depth, bias});
    out.push_back({"random", depth, bias});
    return out;
}

ioco_run_config make_run_config(const StrategyCfg& strategy, double target,
                                std::uint64_t budget, std::uint64_t seed) {
    ioco_run_config cfg{};
    cfg.greedy = strategy.name == "greedy" ? 1 : 0;
    cfg.depth = strategy.depth;
    cfg.coverage_target = target;
    cfg.max_transitions = budget;
    cfg.timeout_millis = 0;
    cfg.input_bias = strategy.input_bias;
    cfg.seed = seed;
    return cfg;
}

// Fixed-size worker pool over an indexed job list.
void run_jobs(unsigned jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (jobs < 1) jobs = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
    };
    std::vector<std::thread> extra;
    for (unsigned t = 1; t < jobs && t < count; ++t) extra.emplace_back(worker);
    worker();
    for (auto& t : extra) t.join();
}

struct Agg {
    std::uint64_t n = 0;
    double sum = 0, sumsq = 0;

    void add(double x) {
        ++n;
        sum += x;
        sumsq += x * x;
    }
    double mean() const { return n == 0 ? std::nan("") : sum / double(n); }
    double sd() const {
        if (n < 2) return n == 0 ? std::nan("") : 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sumsq - double(n) * m * m) / double(n - 1)));
    }
};

std::string num(double value, int decimals = 2) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

// --------------------------------------------------------------- models --

struct NamedModel {
    std::string id;
    ModelPtr model;
};

ioco_gen_params params_from_json(const json& entry, std::uint64_t default_seed) {
    ioco_gen_params p{};
    p.states = entry.value("states", 10u);
    p.degree = entry.value("degree", 6u);
    p.outputs_per_input = entry.value("outputs_per_input", 1u);
    p.components = entry.value("components", 1u);
    p.seed = entry.value("seed", default_seed);
    p.max_attempts = entry.value("max_attempts", 64u);
    p.alphabet_size = entry.value("alphabet_size", 0u);
    return p;
}

ModelPtr generate_model(const ioco_gen_params& params) {
    ioco_model* raw = nullptr;
    check(ioco_generate(&params, &raw, nullptr, nullptr), "generate");
    return ModelPtr(raw);
}

std::string file_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

// ------------------------------------------------------------- generate --

void setup_generate(CLI::App& app) {
    auto* cmd = app.add_subcommand("generate",
                                   "Generate a random run-to-completion model (.aut plus a "
                                   ".meta.json sidecar)");
    auto opts = std::make_shared<ioco_gen_params>();
    opts->states = 10;
    opts->degree = 6;
    opts->outputs_per_input = 1;
    opts->components = 1;
    opts->seed = 1;
    opts->max_attempts = 32;
    opts->alphabet_size = 0;
    auto out_path = std::make_shared<std::string>("model.aut");

    cmd->add_option("--N,--states", opts->states, "States per component")->capture_default_str();
    cmd->add_option("--lambda,--degree", opts->degree, "Outgoing transitions per state")
        ->capture_default_str();
    cmd->add_option("--r,--outputs-per-input", opts->outputs_per_input,
                    "Outputs following each input")
        ->capture_default_str();
    cmd->add_option("--p,--components", opts->components, "Parallel components")
        ->capture_default_str();
    cmd->add_option("--seed", opts->seed, "Generation seed")
        ->envname("IOCO_SEED")
        ->capture_default_str();
    cmd->add_option("--max-attempts", opts->max_attempts, "Retries before giving up")
        ->capture_default_str();
    cmd->add_option("--alphabet", opts->alphabet_size,
                    "Shared alphabet size (0 = fresh name per action)")
        ->capture_default_str();
    cmd->add_option("--out", *out_path, "Output .aut path")->capture_default_str();

    cmd->callback([opts, out_path] {
        ioco_model* raw = nullptr;
        std::uint64_t accepted_seed = 0;
        std::uint32_t attempts = 0;
        check(ioco_generate(opts.get(), &raw, &accepted_seed, &attempts), "generate");
        ModelPtr model(raw);
        check(ioco_model_save_aut(model.get(), out_path->c_str()), *out_path);

        json meta;
        meta["params"] = {{"states", opts->states},
                          {"degree", opts->degree},
                          {"outputs_per_input", opts->outputs_per_input},
                          {"components", opts->components},
                          {"seed", opts->seed},
                          {"max_attempts", opts->max_attempts},
                          {"alphabet_size", opts->alphabet_size}};
        meta["accepted_seed"] = accepted_seed;
        meta["attempts"] = attempts;
        meta["states"] = ioco_model_state_count(model.get());
        meta["transitions"] = ioco_model_transition_count(model.get());
        const std::string meta_path = *out_path + ".meta.json";
        write_file(meta_path, meta.dump(2) + "\n");

        std::printf("wrote %s (%u states, %llu transitions) and %s (attempt %u, seed %llu)\n",
                    out_path->c_str(), ioco_model_state_count(model.get()),
                    (unsigned long long)ioco_model_transition_count(model.get()),
                    meta_path.c_str(), attempts, (unsigned long long)accepted_seed);
    });
}

// ------------------------------------------------------------- validate --

void setup_validate(CLI::App& app) {
    auto* cmd = app.add_subcommand("validate",
                                   "Check a model against the testing requirements; exits "
                                   "nonzero on error-level violations");
    auto path = std::make_shared<std::string>();
    auto conv = std::make_shared<ConvFlags>();
    auto loose = std::make_shared<bool>(false);
    auto format = std::make_shared<std::string>("text");

    cmd->add_option("model", *path, "Model file (.aut)")->required();
    cmd->add_flag("--loose", *loose, "Tolerate internal actions");
    cmd->add_option("--format", *format, "Report format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    add_conv_flags(cmd, *conv);

    cmd->callback([path, conv, loose, format] {
        const auto model = load_model(*path, *conv);
        char* report = nullptr;
        int errors = 0;
        check(ioco_model_validate(model.get(), *loose ? 0 : 1, &report, &errors), *path);
        const std::string text = take_string(report);
        if (*format == "json") {
            std::printf("%s\n", text.c_str());
        } else {
            const json violations = json::parse(text);
            if (violations.empty()) {
                std::printf("ok: %s has no violations\n", path->c_str());
            } else {
                for (const auto& v : violations)
                    std::printf("%s %s: %s\n", v["severity"].get<std::string>().c_str(),
                                v["code"].get<std::string>().c_str(),
                                v["message"].get<std::string>().c_str());
            }
        }
        if (errors > 0) std::exit(1);
    });
}

// -------------------------------------------------------------- convert --

void setup_convert(CLI::App& app) {
    auto* cmd = app.add_subcommand("convert",
                                   "Re-read a model under the given label conventions and "
                                   "write it in canonical form");
    auto in_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto conv = std::make_shared<ConvFlags>();
    auto complete = std::make_shared<bool>(false);

    cmd->add_option("input", *in_path, "Source model file")->required();
    cmd->add_option("output", *out_path, "Destination .aut path")->required();
    cmd->add_flag("--complete", *complete, "Add quiescence self-loops");
    add_conv_flags(cmd, *conv);

    cmd->callback([in_path, out_path, conv, complete] {
        ModelPtr model = load_model(*in_path, *conv);
        if (*complete) model = ensure_delta(std::move(model));
        check(ioco_model_save_aut(model.get(), out_path->c_str()), *out_path);
        std::printf("wrote %s (%u states, %llu transitions)\n", out_path->c_str(),
                    ioco_model_state_count(model.get()),
                    (unsigned long long)ioco_model_transition_count(model.get()));
    });
}

// ---------------------------------------------------------------- serve --

void setup_serve(CLI::App& app) {
    auto* cmd = app.add_subcommand("serve", "Serve a model simulator over the TCP line protocol");
    auto path = std::make_shared<std::string>();
    auto conv = std::make_shared<ConvFlags>();
    auto host = std::make_shared<std::string>("127.0.0.1");
    auto port = std::make_shared<std::uint16_t>(0);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto wall_clock = std::make_shared<bool>(false);

    cmd->add_option("model", *path, "Model file (.aut)")->required();
    cmd->add_option("--host", *host, "Bind address")->capture_default_str();
    cmd->add_option("--port", *port, "Port (0 picks one)")->capture_default_str();
    cmd->add_option("--seed", *seed, "Simulator seed")
        ->envname("IOCO_SEED")
        ->capture_default_str();
    cmd->add_flag("--wall-clock", *wall_clock, "Real quiescence timeouts instead of logical");
    add_conv_flags(cmd, *conv);

    cmd->callback([path, conv, host, port, seed, wall_clock] {
        const auto model = ensure_delta(load_model(*path, *conv));
        ioco_server* raw = nullptr;
        std::uint16_t bound = 0;
        check(ioco_server_start(model.get(), host->c_str(), *port, *wall_clock ? 1 : 0, *seed,
                                &raw, &bound),
              "serve");
        ServerPtr server(raw);
        std::printf("serving %s on %s:%u (%s time, seed %llu); interrupt to stop\n",
                    path->c_str(), host->c_str(), bound, *wall_clock ? "wall-clock" : "logical",
                    (unsigned long long)*seed);
        std::fflush(stdout);
        for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    });
}

// ------------------------------------------------------------------ run --

void setup_run(CLI::App& app) {
    auto* cmd = app.add_subcommand("run",
                                   "One engine run against a simulated or remote "
                                   "implementation; prints the report as JSON");
    struct Args {
        std::string model;
        std::string sut;        // tcp://host:port, empty = in-process
        std::string sut_model;  // in-process implementation model, default = spec model
        ConvFlags conv;
        std::string strategy = "random";
        std::uint32_t depth = 5;
        double target = 1.0;
        std::uint64_t budget = 0;
        std::uint32_t timeout_ms = 0;
        double bias = 0.5;
        std::uint64_t seed = 1;
        std::uint64_t sim_seed = 0;
        bool wall_clock = false;
    };
    auto args = std::make_shared<Args>();

    cmd->add_option("--model", args->model, "Specification model (.aut)")->required();
    cmd->add_option("--sut", args->sut, "Remote implementation as tcp://host:port");
    cmd->add_option("--sut-model", args->sut_model,
                    "Simulate this model as the implementation (defaults to --model)");
    cmd->add_option("--strategy", args->strategy, "Input selection strategy")
        ->check(CLI::IsMember({"random", "greedy"}))
        ->capture_default_str();
    cmd->add_option("--depth", args->depth, "Greedy lookahead depth")->capture_default_str();
    cmd->add_option("--target", args->target, "Coverage fraction to stop at")
        ->capture_default_str();
    cmd->add_option("--budget,--max-transitions", args->budget, "Transition budget (0 = none)")
        ->capture_default_str();
    cmd->add_option("--timeout-ms", args->timeout_ms, "Quiescence timeout per receive")
        ->capture_default_str();
    cmd->add_option("--bias", args->bias, "P(send) when inputs and observations are both open")
        ->capture_default_str();
    cmd->add_option("--seed", args->seed, "Engine seed")
        ->envname("IOCO_SEED")
        ->capture_default_str();
    cmd->add_option("--sim-seed", args->sim_seed, "In-process simulator seed (default: --seed)");
    cmd->add_flag("--wall-clock", args->wall_clock,
                  "Wall-clock quiescence for the in-process simulator");
    add_conv_flags(cmd, args->conv);

    cmd->callback([args, cmd] {
        const auto model = ensure_delta(load_model(args->model, args->conv));

        PortPtr port;
        if (!args->sut.empty()) {
            const std::string prefix = "tcp://";
            if (args->sut.rfind(prefix, 0) != 0)
                die("--sut expects tcp://host:port, got " + args->sut);
            const std::string rest = args->sut.substr(prefix.size());
            const auto colon = rest.rfind(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size())
                die("--sut expects tcp://host:port, got " + args->sut);
            const auto port_no = std::strtoul(rest.c_str() + colon + 1, nullptr, 10);
            if (port_no == 0 || port_no > 65535) die("bad port in " + args->sut);
            ioco_port* raw = nullptr;
            check(ioco_port_tcp(rest.substr(0, colon).c_str(),
                                static_cast<std::uint16_t>(port_no), &raw),
                  args->sut);
            port.reset(raw);
        } else {
            ModelPtr impl;
            const ioco_model* impl_model = model.get();
            if (!args->sut_model.empty()) {
                impl = ensure_delta(load_model(args->sut_model, args->conv));
                impl_model = impl.get();
            }
            const std::uint64_t sim_seed =
                cmd->count("--sim-seed") != 0 ? args->sim_seed : args->seed;
            ioco_port* raw = nullptr;
            check(ioco_port_simulator(impl_model, sim_seed, args->wall_clock ? 1 : 0, &raw),
                  "simulator");
            port.reset(raw);
        }

        ioco_run_config cfg{};
        cfg.greedy = args->strategy == "greedy" ? 1 : 0;
        cfg.depth = args->depth;
        cfg.coverage_target = args->target;
        cfg.max_transitions = args->budget;
        cfg.timeout_millis = args->timeout_ms;
        cfg.input_bias = args->bias;
        cfg.seed = args->seed;

        ioco_report* raw_report = nullptr;
        check(ioco_run(model.get(), port.get(), &cfg, &raw_report), "run");
        ReportPtr report(raw_report);
        char* text = nullptr;
        check(ioco_report_to_json(report.get(), &text), "report");
        std::printf("%s\n", take_string(text).c_str());

        const auto verdict = ioco_report_verdict(report.get());
        if (verdict == IOCO_VERDICT_FAIL_UNEXPECTED_OUTPUT ||
            verdict == IOCO_VERDICT_FAIL_UNEXPECTED_QUIESCENCE)
            std::exit(1);
    });
}

// -------------------------------------------------------- bench-mutants --

struct MutantRow {
    std::string model;
    std::string mutant;
    std::string strategy;
    std::uint64_t runs = 0;
    std::uint64_t detected = 0;
    std::uint64_t censored = 0;
    double mean = std::nan("");
    double sd = std::nan("");
};

void setup_bench_mutants(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench-mutants",
                                   "Mean transitions until each mutant is caught, per "
                                   "strategy; censored runs are flagged, never averaged");
    struct Args {
        std::string model_path;
        std::vector<std::string> mutant_paths;
        std::size_t synthesize = 0;
        std::uint64_t mutant_seed = 0;
        ConvFlags conv;
        std::uint64_t runs = 100;
        std::uint64_t budget = 200'000;
        std::uint32_t depth = 5;
        double bias = 1.0;
        BenchCommon common;
    };
    auto args = std::make_shared<Args>();

    cmd->add_option("--model", args->model_path, "Specification model (.aut)");
    cmd->add_option("--mutant", args->mutant_paths, "Mutant implementation model (repeatable)");
    cmd->add_option("--synthesize", args->synthesize,
                    "Generate this many single-fault mutants instead of reading files");
    auto* mutant_seed_opt =
        cmd->add_option("--mutant-seed", args->mutant_seed, "Seed for mutant synthesis");
    cmd->add_option("--runs", args->runs, "Runs per (mutant, strategy) cell")
        ->capture_default_str();
    cmd->add_option("--budget", args->budget, "Transition budget per run")->capture_default_str();
    cmd->add_option("--depth", args->depth, "Greedy lookahead depth")->capture_default_str();
    cmd->add_option("--bias", args->bias, "P(send) when both directions are open")
        ->capture_default_str();
    add_conv_flags(cmd, args->conv);
    args->common.add_flags(cmd);

    cmd->callback([args, cmd, mutant_seed_opt] {
        const json cfg = args->common.load_config();
        if (args->model_path.empty() && cfg.contains("model"))
            args->model_path = cfg["model"].get<std::string>();
        if (args->model_path.empty()) die("bench-mutants needs --model or a config with one");
        if (args->mutant_paths.empty() && cfg.contains("mutants"))
            args->mutant_paths = cfg["mutants"].get<std::vector<std::string>>();
        if (args->synthesize == 0 && cfg.contains("synthesize"))
            args->synthesize = cfg["synthesize"].get<std::size_t>();
        if (cmd->count("--runs") == 0 && cfg.contains("runs_per_cell"))
            args->runs = cfg["runs_per_cell"].get<std::uint64_t>();
        if (cmd->count("--budget") == 0 && cfg.contains("budget"))
            args->budget = cfg["budget"].get<std::uint64_t>();
        if (args->runs < 1) die("runs_per_cell must be at least 1");
        if (args->mutant_paths.empty() == (args->synthesize == 0))
            die("give either --mutant files or --synthesize, not both or neither");

        const auto model = ensure_delta(load_model(args->model_path, args->conv));
        const std::string model_id = file_stem(args->model_path);
        const auto strategies = resolve_strategies(cfg, args->depth, args->bias);

        std::vector<NamedModel> mutants;
        MutantsPtr synthesized;
        if (args->synthesize > 0) {
            const std::uint64_t seed = mutant_seed_opt->count() != 0
                                           ? args->mutant_seed
                                           : cell_seed(args->common.seed, 0x6d75, 0, 0);
            ioco_mutants* raw = nullptr;
            check(ioco_mutants_generate(model.get(), args->synthesize, seed, &raw),
                  "mutant synthesis");
            synthesized.reset(raw);
            for (std::size_t i = 0; i < ioco_mutants_count(synthesized.get()); ++i) {
                ioco_model* mutant = nullptr;
                check(ioco_mutants_model(synthesized.get(), i, &mutant), "mutant");
                mutants.push_back(
                    {ioco_mutants_description(synthesized.get(), i), ModelPtr(mutant)});
            }
        } else {
            for (const auto& path : args->mutant_paths)
                mutants.push_back({file_stem(path), ensure_delta(load_model(path, args->conv))});
        }

        // One job per (mutant, strategy) cell; each job owns its runs.
        struct Cell {
            std::size_t mutant;
            std::size_t strategy;
            MutantRow row;
        };
        std::vector<Cell> cells;
        for (std::size_t mi = 0; mi < mutants.size(); ++mi)
            for (std::size_t si = 0; si < strategies.size(); ++si)
                cells.push_back({mi, si, {}});

        run_jobs(args->common.jobs, cells.size(), [&](std::size_t idx) {
            auto& cell = cells[idx];
            const auto& strategy = strategies[cell.strategy];
            Agg agg;
            std::uint64_t censored = 0;
            for (std::uint64_t r = 0; r < args->runs; ++r) {
                ioco_port* raw_port = nullptr;
                check(ioco_port_simulator(
                          mutants[cell.mutant].model.get(),
                          cell_seed(args->common.seed, cell.mutant, cell.strategy, r), 0,
                          &raw_port),
                      "simulator");
                PortPtr port(raw_port);
                const auto run_cfg = make_run_config(
                    strategy, 1.0, args->budget,
                    cell_seed(args->common.seed + 1, cell.mutant, cell.strategy, r));
                ioco_report* raw_report = nullptr;
                check(ioco_run(model.get(), port.get(), &run_cfg, &raw_report), "run");
                ReportPtr report(raw_report);
                const auto verdict = ioco_report_verdict(report.get());
                if (verdict == IOCO_VERDICT_FAIL_UNEXPECTED_OUTPUT ||
                    verdict == IOCO_VERDICT_FAIL_UNEXPECTED_QUIESCENCE) {
                    // +1 counts the observation that revealed the fault
                    agg.add(double(ioco_report_transitions(report.get()) + 1));
                } else {
                    ++censored;
                }
            }
            cell.row = {model_id, mutants[cell.mutant].id, strategy.name, args->runs,
                        agg.n,    censored,                agg.mean(),    agg.sd()};
        });

        std::vector<MutantRow> rows;
        for (auto& cell : cells) rows.push_back(std::move(cell.row));
        std::sort(rows.begin(), rows.end(), [](const MutantRow& a, const MutantRow& b) {
            return std::tie(a.model, a.mutant, a.strategy) <
                   std::tie(b.model, b.mutant, b.strategy);
        });

        std::filesystem::create_directories(args->common.out_dir);
        const std::string base = args->common.out_dir + "/mutants";
        if (args->common.format == "json") {
            json out = json::array();
            for (const auto& r : rows)
                out.push_back({{"model", r.model},
                               {"mutant", r.mutant},
                               {"strategy", r.strategy},
                               {"runs", r.runs},
                               {"detected", r.detected},
                               {"censored", r.censored},
                               {"mean_transitions", r.mean},
                               {"sd_transitions", r.sd}});
            write_file(base + ".json", out.dump(2) + "\n");
            std::printf("wrote %s.json\n", base.c_str());
        } else {
            std::string csv =
                "model,mutant,strategy,runs,detected,censored,mean_transitions,sd_transitions\n";
            for (const auto& r : rows)
                csv += r.model + "," + r.mutant + "," + r.strategy + "," +
                       std::to_string(r.runs) + "," + std::to_string(r.detected) + "," +
                       std::to_string(r.censored) + "," + num(r.mean) + "," + num(r.sd) + "\n";
            write_file(base + ".csv", csv);
            std::printf("wrote %s.csv\n", base.c_str());
        }

        // Arithmetic mean of the per-mutant means, per strategy.
        for (const auto& strategy : strategies) {
            Agg overall;
            std::uint64_t censored = 0;
            for (const auto& r : rows)
                if (r.strategy == strategy.name) {
                    if (!std::isnan(r.mean)) overall.add(r.mean);
                    censored += r.censored;
                }
            std::printf("%s: mean of per-mutant means %s over %llu mutants (%llu censored "
                        "runs excluded)\n",
                        strategy.name.c_str(), num(overall.mean()).c_str(),
                        (unsigned long long)overall.n, (unsigned long long)censored);
        }
        auto strategy_mean = [&](const std::string& name) {
            Agg a;
            for (const auto& r : rows)
                if (r.strategy == name && !std::isnan(r.mean)) a.add(r.mean);
            return a.mean();
        };
        const double greedy = strategy_mean("greedy");
        const double random = strategy_mean("random");
        if (!std::isnan(greedy) && !std::isnan(random) && greedy > 0)
            std::printf("random/greedy ratio: %s\n", num(random / greedy).c_str());
    });
}

// ------------------------------------------------------- bench-coverage --

struct CoverageRow {
    std::string model;
    std::string strategy;
    double threshold = 0;
    std::uint64_t runs = 0;
    std::uint64_t reached = 0;
    std::uint64_t censored = 0;
    double mean = std::nan("");
    double sd = std::nan("");
};

std::string gnuplot_script(const std::string& csv_name,
                           const std::vector<std::pair<std::string, std::string>>& series) {
    std::string gp;
    gp += "# Mean transitions to reach each coverage threshold: dashed mean,\n";
    gp += "# dotted mean+-sd. Render with: gnuplot -p coverage.gp\n";
    gp += "set datafile separator \",\"\n";
    gp += "set xlabel \"transitions\"\n";
    gp += "set ylabel \"fraction of states covered\"\n";
    gp += "set key bottom right\n";
    gp += "plot \\\n";
    std::vector<std::string> parts;
    for (const auto& [model, strategy] : series) {
        const std::string filter =
            "(strcol(1) eq \"" + model + "\" && strcol(2) eq \"" + strategy + "\"";
        parts.push_back("  \"" + csv_name + "\" using " + filter +
                        " ? $7 : NaN):3 with lines dashtype 2 title \"" + model + " " +
                        strategy + "\"");
        parts.push_back("  \"" + csv_name + "\" using " + filter +
                        " ? $7-$8 : NaN):3 with lines dashtype 3 notitle");
        parts.push_back("  \"" + csv_name + "\" using " + filter +
                        " ? $7+$8 : NaN):3 with lines dashtype 3 notitle");
    }
    for (std::size_t i = 0; i < parts.size(); ++i)
        gp += parts[i] + (i + 1 < parts.size() ? ", \\\n" : "\n");
    return gp;
}

void setup_bench_coverage(CLI::App& app) {
    auto* cmd = app.add_subcommand("bench-coverage",
                                   "Mean transitions to reach coverage thresholds per "
                                   "strategy; emits CSV plus a gnuplot script");
    struct Args {
        std::vector<std::string> model_paths;
        ConvFlags conv;
        std::uint32_t gen_count = 0;
        ioco_gen_params gen{};
        std::vector<double> thresholds = {0.9875};
        std::uint64_t runs = 10;
        std::uint64_t budget = 2'000'000;
        std::uint32_t depth = 5;
        double bias = 1.0;
        BenchCommon common;
    };
    auto args = std::make_shared<Args>();
    args->gen.states = 10;
    args->gen.degree = 6;
    args->gen.outputs_per_input = 1;
    args->gen.components = 1;
    args->gen.max_attempts = 64;

    cmd->add_option("--model", args->model_paths, "Model file (repeatable)");
    cmd->add_option("--gen-count", args->gen_count, "Generate this many models instead");
    cmd->add_option("--N,--states", args->gen.states, "States per generated component")
        ->capture_default_str();
    cmd->add_option("--lambda,--degree", args->gen.degree, "Transitions per skeleton state")
        ->capture_default_str();
    cmd->add_option("--r,--outputs-per-input", args->gen.outputs_per_input,
                    "Outputs following each input")
        ->capture_default_str();
    cmd->add_option("--p,--components", args->gen.components, "Parallel components")
        ->capture_default_str();
    cmd->add_option("--thresholds", args->thresholds, "Coverage fractions, strictly increasing")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--runs", args->runs, "Runs per (model, strategy) cell")
        ->capture_default_str();
    cmd->add_option("--budget", args->budget, "Transition budget per run")->capture_default_str();
    cmd->add_option("--depth", args->depth, "Greedy lookahead depth")->capture_default_str();
    cmd->add_option("--bias", args->bias, "P(send) when both directions are open")
        ->capture_default_str();
    add_conv_flags(cmd, args->conv);
    args->common.add_flags(cmd);

    cmd->callback([args, cmd] {
        const json cfg = args->common.load_config();
        if (cmd->count("--runs") == 0 && cfg.contains("runs_per_cell"))
            args->runs = cfg["runs_per_cell"].get<std::uint64_t>();
        if (cmd->count("--budget") == 0 && cfg.contains("budget"))
            args->budget = cfg["budget"].get<std::uint64_t>();
        if (cmd->count("--thresholds") == 0 && cfg.contains("coverage_thresholds"))
            args->thresholds = cfg["coverage_thresholds"].get<std::vector<double>>();
        if (args->runs < 1) die("runs_per_cell must be at least 1");
        if (args->thresholds.empty()) die("at least one coverage threshold is required");
        for (std::size_t i = 0; i < args->thresholds.size(); ++i) {
            const double t = args->thresholds[i];
            if (t <= 0 || t > 1) die("thresholds must lie in (0, 1]");
            if (i > 0 && t <= args->thresholds[i - 1])
                die("thresholds must be strictly increasing");
        }

        // Models: files and/or generated ones, also from the config.
        std::vector<NamedModel> models;
        for (const auto& path : args->model_paths)
            models.push_back({file_stem(path), ensure_delta(load_model(path, args->conv))});
        if (cfg.contains("models")) {
            for (const auto& entry : cfg["models"]) {
                if (entry.is_string()) {
                    const auto path = entry.get<std::string>();
                    models.push_back({file_stem(path),
                                      ensure_delta(load_model(path, args->conv))});
                } else {
                    const auto params = params_from_json(entry, args->common.seed);
                    models.push_back({"gen" + std::to_string(models.size()),
                                      generate_model(params)});
                }
            }
        }
        for (std::uint32_t k = 0; k < args->gen_count; ++k) {
            ioco_gen_params params = args->gen;
            params.seed = cell_seed(args->common.seed, 0x9e4, k, 0);
            models.push_back({"gen" + std::to_string(models.size()), generate_model(params)});
        }
        if (models.empty()) die("no models: give --model, --gen-count, or a config list");

        const auto strategies = resolve_strategies(cfg, args->depth, args->bias);
        const double top_threshold = args->thresholds.back();

        // One job per (model, strategy, run); each yields every threshold
        // crossing from the run's coverage curve.
        struct RunJob {
            std::size_t model;
            std::size_t strategy;
            std::uint64_t run;
            std::vector<std::optional<std::uint64_t>> crossings;
        };
        std::vector<RunJob> jobs_list;
        for (std::size_t mi = 0; mi < models.size(); ++mi)
            for (std::size_t si = 0; si < strategies.size(); ++si)
                for (std::uint64_t r = 0; r < args->runs; ++r)
                    jobs_list.push_back({mi, si, r, {}});

        run_jobs(args->common.jobs, jobs_list.size(), [&](std::size_t idx) {
            auto& job = jobs_list[idx];
            const auto* model = models[job.model].model.get();
            ioco_port* raw_port = nullptr;
            check(ioco_port_simulator(model,
                                      cell_seed(args->common.seed, job.model, job.strategy,
                                                job.run),
                                      0, &raw_port),
                  "simulator");
            PortPtr port(raw_port);
            const auto run_cfg =
                make_run_config(strategies[job.strategy], top_threshold, args->budget,
                                cell_seed(args->common.seed + 1, job.model, job.strategy,
                                          job.run));
            ioco_report* raw_report = nullptr;
            check(ioco_run(model, port.get(), &run_cfg, &raw_report), "run");
            ReportPtr report(raw_report);
            char* text = nullptr;
            check(ioco_report_to_json(report.get(), &text), "report");
            const json curve = json::parse(take_string(text)).at("coverage_curve");

            const auto states = ioco_model_state_count(model);
            job.crossings.assign(args->thresholds.size(), std::nullopt);
            for (std::size_t ti = 0; ti < args->thresholds.size(); ++ti) {
                const auto needed = static_cast<std::uint64_t>(
                    std::ceil(args->thresholds[ti] * states - 1e-9));
                for (const auto& point : curve) {
                    if (point.at(1).get<std::uint64_t>() >= needed) {
                        job.crossings[ti] = point.at(0).get<std::uint64_t>();
                        break;
                    }
                }
            }
        });

        std::vector<CoverageRow> rows;
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            for (std::size_t si = 0; si < strategies.size(); ++si) {
                for (std::size_t ti = 0; ti < args->thresholds.size(); ++ti) {
                    Agg agg;
                    std::uint64_t censored = 0;
                    for (const auto& job : jobs_list) {
                        if (job.model != mi || job.strategy != si) continue;
                        if (job.crossings[ti])
                            agg.add(double(*job.crossings[ti]));
                        else
                            ++censored;
                    }
                    rows.push_back({models[mi].id, strategies[si].name, args->thresholds[ti],
                                    args->runs, agg.n, censored, agg.mean(), agg.sd()});
                }
            }
        }
        std::sort(rows.begin(), rows.end(), [](const CoverageRow& a, const CoverageRow& b) {
            return std::tie(a.model, a.strategy, a.threshold) <
                   std::tie(b.model, b.strategy, b.threshold);
        });

        std::filesystem::create_directories(args->common.out_dir);
        const std::string base = args->common.out_dir + "/coverage";
        if (args->common.format == "json") {
            json out = json::array();
            for (const auto& r : rows)
                out.push_back({{"model", r.model},
                               {"strategy", r.strategy},
                               {"threshold", r.threshold},
                               {"runs", r.runs},
                               {"reached", r.reached},
                               {"censored", r.censored},
                               {"mean_transitions", r.mean},
                               {"sd_transitions", r.sd}});
            write_file(base + ".json", out.dump(2) + "\n");
            std::printf("wrote %s.json\n", base.c_str());
        } else {
            std::string csv =
                "model,strategy,threshold,runs,reached,censored,mean_transitions,"
                "sd_transitions\n";
            for (const auto& r : rows)
                csv += r.model + "," + r.strategy + "," + num(r.threshold, 4) + "," +
                       std::to_string(r.runs) + "," + std::to_string(r.reached) + "," +
                       std::to_string(r.censored) + "," + num(r.mean) + "," + num(r.sd) + "\n";
            write_file(base + ".csv", csv);

            std::vector<std::pair<std::string, std::string>> series;
            for (const auto& m : models)
                for (const auto& s : strategies) series.emplace_back(m.id, s.name);
            write_file(base + ".gp", gnuplot_script("coverage.csv", series));
            std::printf("wrote %s.csv and %s.gp\n", base.c_str(), base.c_str());
        }

        // Headline comparison at the top threshold.
        auto pooled = [&](const std::string& strategy) {
            Agg a;
            for (const auto& job : jobs_list)
                if (strategies[job.strategy].name == strategy && job.crossings.back())
                    a.add(double(*job.crossings.back()));
            return a;
        };
        const Agg greedy = pooled("greedy");
        const Agg random = pooled("random");
        if (greedy.n > 0)
            std::printf("greedy: mean %s transitions to %s coverage over %llu runs\n",
                        num(greedy.mean()).c_str(), num(top_threshold, 4).c_str(),
                        (unsigned long long)greedy.n);
        if (random.n > 0)
            std::printf("random: mean %s transitions to %s coverage over %llu runs\n",
                        num(random.mean()).c_str(), num(top_threshold, 4).c_str(),
                        (unsigned long long)random.n);
        if (greedy.n > 0 && random.n > 0 && greedy.mean() > 0)
            std::printf("random/greedy ratio at %s: %s\n", num(top_threshold, 4).c_str(),
                        num(random.mean() / greedy.mean()).c_str());
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("ioco-based model-based testing workbench (library ") +
                 ioco_version() + ")"};
    app.require_subcommand(1);

    setup_generate(app);
    setup_validate(app);
    setup_convert(app);
    setup_serve(app);
    setup_run(app);
    setup_bench_mutants(app);
    setup_bench_coverage(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    return 0;
}
