// Command-line experiment runner for the affine Arthur-Merlin simulator.
//
//   affam run      --config cfg.json | --protocol NAME --epsilon p/q ...
//   affam inspect  --protocol NAME | --spec file.json
//   affam catalog
//   affam trace    --protocol NAME --input WORD --seed N
//
// Exit codes: 0 = all declared bounds satisfied, 2 = a bound violated or an
// invalid spec inspected, 1 = usage or parse errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "affam/engine.hpp"
#include "affam/errors.hpp"
#include "affam/protocols.hpp"
#include "affam/serialize.hpp"

using namespace affam;
using nlohmann::json;

namespace {

struct ExperimentConfig {
    std::string protocol;
    ProtocolParams params;
    std::vector<Word> inputs;
    bool all_up_to = false;
    int max_len = 0;
    std::string mode = "exact";  // exact | worst | mc | rounds
    long horizon = 60000;
    std::size_t node_cap = 8000000;
    long trials = 10000;
    unsigned long seed = 1;
    std::string out_dir = "reports";
};

Rational parse_epsilon(const std::string& text) {
    const Rational eps = Rational::parse(text);
    if (!(eps > Rational(0) && eps < Rational(1))) throw ConfigError("epsilon out of range");
    return eps;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ExperimentConfig load_config(const std::string& path) {
    ExperimentConfig cfg;
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        cfg.protocol = j.at("protocol").get<std::string>();
        if (j.contains("epsilon")) cfg.params.epsilon = parse_epsilon(j.at("epsilon"));
        const json params = j.value("parameters", json::object());
        if (params.contains("marked_symbol"))
            cfg.params.marked_symbol = params.at("marked_symbol").get<std::string>();
        if (params.contains("marker")) cfg.params.marker = params.at("marker").get<std::string>();
        if (params.contains("alphabet"))
            cfg.params.alphabet = params.at("alphabet").get<std::vector<std::string>>();
        if (params.contains("semantics"))
            cfg.params.semantics = params.at("semantics").get<std::string>() == "any"
                                       ? MiddleSemantics::AnySymbol
                                       : MiddleSemantics::MarkedSymbol;
        if (params.contains("machine"))
            cfg.params.machine_name = params.at("machine").get<std::string>();
        if (params.contains("machine_file"))
            cfg.params.machine = machine_from_json(slurp(params.at("machine_file")));
        if (params.contains("continuation")) {
            const json cc = params.at("continuation");
            cfg.params.continuation_kind = cc.value("kind", std::string("exponential"));
            cfg.params.continuation_k = cc.value("k", 1);
            cfg.params.continuation_c = cc.value("c", 1);
        }
        const json inputs = j.value("inputs", json::object());
        if (inputs.contains("all_up_to")) {
            cfg.all_up_to = true;
            cfg.max_len = inputs.at("all_up_to").get<int>();
        }
        if (inputs.contains("words"))
            for (const auto& w : inputs.at("words"))
                cfg.inputs.push_back(word_from_chars(w.get<std::string>()));
        cfg.mode = j.value("mode", std::string("exact"));
        cfg.horizon = j.value("horizon", cfg.horizon);
        cfg.node_cap = j.value("node_cap", cfg.node_cap);
        cfg.trials = j.value("trials", cfg.trials);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    return cfg;
}

std::vector<Word> enumerate_inputs(const ProtocolBundle& bundle, int max_len) {
    std::vector<Word> out{{}};
    std::size_t begin = 0;
    for (int len = 1; len <= max_len; ++len) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i)
            for (const auto& s : bundle.verifier.input_alphabet) {
                Word w = out[i];
                w.push_back(s);
                out.push_back(std::move(w));
            }
        begin = end;
    }
    return out;
}

struct Row {
    std::string input;
    bool member = false;
    Rational p_accept, p_reject, p_restart, p_unresolved;
    Rational overall_accept;  // round-structured protocols
    bool has_overall = false;
    double accept_freq = 0.0;  // mc mode
    std::string steps;         // expected halting steps (lower bound) or mc mean
    std::string bound;         // "ok" | "VIOLATED" | "n/a"
    std::string error;
};

std::string fr(const Rational& r) { return r.str(); }

int run_command(const ExperimentConfig& cfg) {
    ProtocolBundle bundle = build_protocol(cfg.protocol, cfg.params);
    Machine machine(bundle.verifier);
    const EngineLimits limits{cfg.horizon, cfg.node_cap};

    std::vector<Word> inputs = cfg.inputs;
    if (cfg.all_up_to) {
        auto all = enumerate_inputs(bundle, cfg.max_len);
        inputs.insert(inputs.end(), all.begin(), all.end());
    }
    if (inputs.empty()) throw ConfigError("no inputs given (use --input or --all-up-to)");

    std::vector<Row> rows;
    bool all_ok = true;
    bool any_error = false;

    for (const auto& w : inputs) {
        Row row;
        row.input = word_to_string(w);
        try {
            row.member = bundle.membership(w);
            const bool rounds =
                bundle.round_structured && (cfg.mode == "rounds" || cfg.mode == "worst");
            if (cfg.mode == "mc") {
                auto prover = bundle.honest_prover(w);
                const MonteCarloResult mc =
                    monte_carlo(machine, w, *prover, cfg.trials, cfg.seed, limits);
                row.accept_freq = mc.accept_frequency();
                {
                    std::ostringstream os;
                    os << mc.mean_steps;
                    row.steps = os.str();
                }
                row.p_accept = Rational(mc.accepted, std::max(1L, mc.trials));
                row.p_reject = Rational(mc.rejected, std::max(1L, mc.trials));
                row.p_restart = Rational(mc.restarted, std::max(1L, mc.trials));
                row.p_unresolved = Rational(mc.unresolved, std::max(1L, mc.trials));
                row.bound = "n/a";
            } else if (rounds) {
                std::unique_ptr<ReplyMenu> menu;
                if (bundle.adversary_menu) menu = bundle.adversary_menu(w);
                const RoundsWorstResult rw = evaluate_rounds_worst(machine, w, limits, menu.get());
                row.p_accept = rw.round.p_accept;
                row.p_reject = rw.round.p_reject;
                row.p_restart = rw.round.p_restart;
                row.p_unresolved = rw.round_unresolved;
                row.overall_accept = rw.overall_accept_ub;
                row.has_overall = true;
                const bool ok = row.member ? rw.overall_accept_lb == Rational(1)
                                           : rw.overall_accept_ub <= bundle.epsilon;
                row.bound = ok ? "ok" : "VIOLATED";
            } else if (cfg.mode == "worst") {
                std::unique_ptr<ReplyMenu> menu;
                if (bundle.adversary_menu) menu = bundle.adversary_menu(w);
                const WorstCaseResult worst =
                    evaluate_worst_case(machine, w, Objective::Accept, limits, false, menu.get());
                row.p_accept = worst.result.p_accept;
                row.p_reject = worst.result.p_reject;
                row.p_restart = worst.result.p_restart;
                row.p_unresolved = worst.result.p_unresolved;
                const bool ok = row.member
                                    ? (bundle.perfect_completeness
                                           ? row.p_accept == Rational(1)
                                           : row.p_accept >= Rational(1) - bundle.epsilon)
                                    : row.p_accept + row.p_unresolved <= bundle.epsilon;
                row.bound = ok ? "ok" : "VIOLATED";
            } else {  // exact, honest prover
                auto prover = bundle.honest_prover(w);
                const EvalResult r = evaluate_exact(machine, w, *prover, limits);
                row.p_accept = r.p_accept;
                row.p_reject = r.p_reject;
                row.p_restart = r.p_restart;
                row.p_unresolved = r.p_unresolved;
                row.steps = r.expected_steps_lb.str();
                Rational effective_accept = r.p_accept;
                if (bundle.round_structured && !(r.p_accept + r.p_reject).is_zero()) {
                    row.overall_accept =
                        round_fixpoint({r.p_accept, r.p_reject, r.p_restart}).overall_accept;
                    row.has_overall = true;
                    effective_accept = row.overall_accept;
                }
                const bool ok = row.member
                                    ? (bundle.perfect_completeness
                                           ? effective_accept == Rational(1)
                                           : effective_accept >= Rational(1) - bundle.epsilon)
                                    : effective_accept <= bundle.epsilon;
                row.bound = ok ? "ok" : "VIOLATED";
            }
        } catch (const Error& e) {
            row.error = e.what();
            any_error = true;
        }
        if (row.bound == "VIOLATED") all_ok = false;
        rows.push_back(std::move(row));
    }

    // stdout table
    std::cout << "protocol " << bundle.name << "  epsilon " << bundle.epsilon.str() << "  mode "
              << cfg.mode << "\n";
    for (const auto& row : rows) {
        std::cout << (row.input.empty() ? "(empty)" : row.input) << "  member=" << row.member;
        if (!row.error.empty()) {
            std::cout << "  ERROR: " << row.error << "\n";
            continue;
        }
        std::cout << "  acc=" << fr(row.p_accept) << " (" << row.p_accept.to_double() << ")"
                  << "  rej=" << fr(row.p_reject);
        if (!row.p_restart.is_zero()) std::cout << "  restart=" << fr(row.p_restart);
        if (!row.p_unresolved.is_zero()) std::cout << "  unresolved=" << fr(row.p_unresolved);
        if (row.has_overall) std::cout << "  overall=" << fr(row.overall_accept);
        if (!row.steps.empty()) std::cout << "  steps=" << row.steps;
        std::cout << "  bound=" << row.bound << "\n";
    }

    // reports
    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream csv(cfg.out_dir + "/report.csv");
        csv << "input,member,p_accept,p_reject,p_restart,p_unresolved,overall_accept,"
               "p_accept_decimal,steps,bound,error\n";
        for (const auto& row : rows)
            csv << row.input << ',' << row.member << ',' << fr(row.p_accept) << ','
                << fr(row.p_reject) << ',' << fr(row.p_restart) << ',' << fr(row.p_unresolved)
                << ',' << (row.has_overall ? fr(row.overall_accept) : "") << ','
                << row.p_accept.to_double() << ',' << row.steps << ',' << row.bound << ','
                << row.error << "\n";
    }
    {
        json summary;
        summary["protocol"] = bundle.name;
        summary["epsilon"] = bundle.epsilon.str();
        summary["mode"] = cfg.mode;
        summary["seed"] = cfg.seed;
        summary["inputs"] = rows.size();
        summary["all_bounds_ok"] = all_ok;
        summary["errors"] = any_error;
        json jrows = json::array();
        for (const auto& row : rows) {
            json jr;
            jr["input"] = row.input;
            jr["member"] = row.member;
            jr["p_accept"] = fr(row.p_accept);
            jr["p_reject"] = fr(row.p_reject);
            jr["p_restart"] = fr(row.p_restart);
            jr["p_unresolved"] = fr(row.p_unresolved);
            if (row.has_overall) jr["overall_accept"] = fr(row.overall_accept);
            jr["steps"] = row.steps;
            jr["bound"] = row.bound;
            if (!row.error.empty()) jr["error"] = row.error;
            jrows.push_back(std::move(jr));
        }
        summary["rows"] = std::move(jrows);
        std::ofstream(cfg.out_dir + "/summary.json") << summary.dump(2) << "\n";
    }
    std::cout << (all_ok ? "all declared bounds satisfied" : "BOUND VIOLATION") << "; reports in "
              << cfg.out_dir << "\n";
    if (any_error) return 1;
    return all_ok ? 0 : 2;
}

int inspect_spec(const VerifierSpec& spec) {
    std::cout << "name: " << spec.name << "\n";
    std::cout << "mode: " << (spec.mode == Mode::OneWay ? "one-way" : "two-way") << "\n";
    std::cout << "states: " << spec.states.size() << "\n";
    std::cout << "input alphabet:";
    for (const auto& s : spec.input_alphabet) std::cout << " " << s;
    std::cout << "\ncommunication alphabet:";
    for (const auto& s : spec.gamma) std::cout << " " << s;
    std::cout << "\n";
    for (const auto& reg : spec.registers) {
        std::cout << "register " << reg.name << " (dimension " << reg.dim << ")";
        if (!reg.accept_outcomes.empty()) {
            std::cout << " accepting outcomes:";
            for (int o : reg.accept_outcomes) std::cout << " " << o;
        }
        std::cout << "\n";
        for (const auto& [name, op] : reg.operators) {
            std::cout << "  " << name << ":\n";
            std::istringstream lines(op.str());
            std::string line;
            while (std::getline(lines, line)) std::cout << "    " << line << "\n";
        }
    }
    const auto bad = spec.validate();
    if (bad.empty()) {
        std::cout << "validation: ok\n";
        return 0;
    }
    std::cout << "validation: " << bad.size() << " violation(s)\n";
    for (const auto& v : bad) std::cout << "  " << v << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact simulator for affine-register Arthur-Merlin verifiers"};
    app.require_subcommand(1);

    std::string config_path, protocol, epsilon = "1/3", input, mode = "exact", out_dir,
                spec_file, machine_name;
    int all_up_to = -1;
    long horizon = -1, trials = -1;
    std::size_t node_cap = 0;
    unsigned long seed = 1;

    auto* run = app.add_subcommand("run", "evaluate a protocol over inputs and emit reports");
    run->add_option("--config", config_path, "experiment config (json)");
    run->add_option("--protocol", protocol, "protocol name (see catalog)");
    run->add_option("--epsilon", epsilon, "error bound as p/q");
    run->add_option("--input", input, "single input word");
    run->add_option("--all-up-to", all_up_to, "every word up to this length");
    run->add_option("--mode", mode, "exact | worst | mc | rounds");
    run->add_option("--horizon", horizon, "step bound per path");
    run->add_option("--node-cap", node_cap, "explored-node budget");
    run->add_option("--trials", trials, "monte carlo trials");
    run->add_option("--seed", seed, "monte carlo seed");
    run->add_option("--machine", machine_name, "sample machine for streaming protocols");
    run->add_option("--out", out_dir, "report directory");

    auto* inspect = app.add_subcommand("inspect", "dump a verifier spec and validate it");
    inspect->add_option("--protocol", protocol, "build this protocol and inspect it");
    inspect->add_option("--epsilon", epsilon, "error bound as p/q");
    inspect->add_option("--machine", machine_name, "sample machine for streaming protocols");
    inspect->add_option("--spec", spec_file, "verifier spec file (json)");

    app.add_subcommand("catalog", "list protocols and bundled machines");

    auto* trace = app.add_subcommand("trace", "sample one path under the honest prover");
    trace->add_option("--protocol", protocol, "protocol name")->required();
    trace->add_option("--epsilon", epsilon, "error bound as p/q");
    trace->add_option("--input", input, "input word")->required();
    trace->add_option("--seed", seed, "sampling seed");
    trace->add_option("--machine", machine_name, "sample machine for streaming protocols");
    trace->add_option("--horizon", horizon, "step bound");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("catalog")) {
            std::cout << "protocols:\n";
            for (const auto& name : protocol_names()) std::cout << "  " << name << "\n";
            std::cout << "machines:\n";
            for (const auto& [name, m] : sample_machines())
                std::cout << "  " << name << " ("
                          << (m.flavor == TMFlavor::Deterministic ? "deterministic"
                                                                  : "alternating")
                          << ", " << m.states.size() << " states)\n";
            return 0;
        }

        if (app.got_subcommand("inspect")) {
            if (!spec_file.empty()) return inspect_spec(verifier_from_json(slurp(spec_file)));
            if (protocol.empty()) throw ConfigError("inspect needs --protocol or --spec");
            ProtocolParams params;
            params.epsilon = parse_epsilon(epsilon);
            params.machine_name = machine_name;
            return inspect_spec(build_protocol(protocol, params).verifier);
        }

        if (app.got_subcommand("trace")) {
            ProtocolParams params;
            params.epsilon = parse_epsilon(epsilon);
            params.machine_name = machine_name;
            ProtocolBundle bundle = build_protocol(protocol, params);
            Machine machine(bundle.verifier);
            const Word w = word_from_chars(input);
            auto prover = bundle.honest_prover(w);
            const EngineLimits limits{horizon > 0 ? horizon : 60000, 8000000};
            const TraceResult t = sample_trace(machine, w, *prover, seed, limits);
            for (const auto& line : t.lines) std::cout << line << "\n";
            return 0;
        }

        // run
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!protocol.empty()) cfg.protocol = protocol;
        if (run->count("--epsilon")) cfg.params.epsilon = parse_epsilon(epsilon);
        if (!machine_name.empty()) cfg.params.machine_name = machine_name;
        if (!input.empty()) cfg.inputs.push_back(word_from_chars(input));
        if (all_up_to >= 0) {
            cfg.all_up_to = true;
            cfg.max_len = all_up_to;
        }
        if (run->count("--mode")) cfg.mode = mode;
        if (horizon > 0) cfg.horizon = horizon;
        if (node_cap > 0) cfg.node_cap = node_cap;
        if (trials > 0) cfg.trials = trials;
        if (run->count("--seed")) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (cfg.protocol.empty()) throw ConfigError("run needs --protocol or --config");
        if (cfg.mode != "exact" && cfg.mode != "worst" && cfg.mode != "mc" &&
            cfg.mode != "rounds")
            throw ConfigError("unknown mode '" + cfg.mode + "'");
        return run_command(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
