#include "affam/serialize.hpp"

#include <json.hpp>

#include "affam/errors.hpp"

namespace affam {

using nlohmann::json;

namespace {

json rows_to_json(const AffineOperator& op) {
    json rows = json::array();
    for (const auto& r : op.rows()) {
        json row = json::array();
        for (const auto& x : r) row.push_back(x.str());
        rows.push_back(std::move(row));
    }
    return rows;
}

AffineOperator rows_from_json(const json& j) {
    std::vector<RVec> rows;
    for (const auto& r : j) {
        RVec row;
        for (const auto& x : r) row.push_back(Rational::parse(x.get<std::string>()));
        rows.push_back(std::move(row));
    }
    // unchecked so that validate() can report a bad matrix instead of a parse
    // failure hiding it
    return AffineOperator::unchecked(std::move(rows));
}

std::string move_to_string(Move m) {
    switch (m) {
        case Move::Left: return "L";
        case Move::Stay: return "S";
        default: return "R";
    }
}

Move move_from_string(const std::string& s) {
    if (s == "L") return Move::Left;
    if (s == "S") return Move::Stay;
    if (s == "R") return Move::Right;
    throw ConfigError("bad head move '" + s + "'");
}

std::string tau_key(const std::vector<int>& tau) {
    std::string s;
    for (std::size_t i = 0; i < tau.size(); ++i) s += (i ? "," : "") + std::to_string(tau[i]);
    return s;
}

std::vector<int> tau_from_key(const std::string& s) {
    std::vector<int> tau;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string part = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!part.empty()) tau.push_back(std::stoi(part));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return tau;
}

}  // namespace

std::string verifier_to_json(const VerifierSpec& spec, int indent) {
    json j;
    j["name"] = spec.name;
    j["mode"] = spec.mode == Mode::OneWay ? "one-way" : "two-way";
    j["states"] = spec.states;
    j["initial"] = spec.initial;
    j["accept"] = spec.accept_states;
    j["reject"] = spec.reject_states;
    j["restart"] = spec.restart_states;
    j["input_alphabet"] = spec.input_alphabet;
    j["communication_alphabet"] = spec.gamma;

    json comm = json::object();
    for (const auto& [q, rule] : spec.communication) {
        json c;
        c["writes"] = rule.writes;
        c["on_reply"] = rule.on_reply;
        comm[q] = std::move(c);
    }
    j["communication"] = std::move(comm);

    json regs = json::array();
    for (const auto& r : spec.registers) {
        json jr;
        jr["name"] = r.name;
        jr["dimension"] = r.dim;
        jr["accept_outcomes"] = r.accept_outcomes;
        json ops = json::object();
        for (const auto& [name, op] : r.operators) ops[name] = rows_to_json(op);
        jr["operators"] = std::move(ops);
        regs.push_back(std::move(jr));
    }
    j["registers"] = std::move(regs);

    json delta = json::array();
    for (const auto& [key, rule] : spec.delta) {
        json jt;
        jt["state"] = key.first;
        jt["symbol"] = key.second;
        json actions = json::array();
        for (const auto& a : rule.actions)
            actions.push_back(a.kind == AffineAction::Kind::Weigh ? "@weigh" : a.op);
        jt["actions"] = std::move(actions);
        json next = json::object();
        for (const auto& [tau, target] : rule.next) {
            json t;
            t["state"] = target.state;
            t["move"] = move_to_string(target.move);
            next[tau_key(tau)] = std::move(t);
        }
        jt["next"] = std::move(next);
        delta.push_back(std::move(jt));
    }
    j["delta"] = std::move(delta);
    return j.dump(indent);
}

VerifierSpec verifier_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("verifier spec parse error: ") + e.what());
    }
    try {
        VerifierSpec spec;
        spec.name = j.value("name", "");
        spec.mode = j.at("mode").get<std::string>() == "one-way" ? Mode::OneWay : Mode::TwoWay;
        spec.states = j.at("states").get<std::vector<std::string>>();
        spec.initial = j.at("initial").get<std::string>();
        spec.accept_states = j.at("accept").get<std::set<std::string>>();
        spec.reject_states = j.value("reject", std::set<std::string>{});
        spec.restart_states = j.value("restart", std::set<std::string>{});
        spec.input_alphabet = j.at("input_alphabet").get<std::vector<std::string>>();
        spec.gamma = j.at("communication_alphabet").get<std::vector<std::string>>();
        const json comm_in = j.value("communication", json::object());
        for (const auto& [q, c] : comm_in.items()) {
            CommRule rule;
            rule.writes = c.at("writes").get<std::string>();
            rule.on_reply = c.at("on_reply").get<std::map<std::string, std::string>>();
            spec.communication[q] = std::move(rule);
        }
        for (const auto& jr : j.at("registers")) {
            RegisterDef r;
            r.name = jr.at("name").get<std::string>();
            r.dim = jr.at("dimension").get<std::size_t>();
            r.accept_outcomes = jr.value("accept_outcomes", std::vector<int>{});
            for (const auto& [name, rows] : jr.at("operators").items())
                r.operators.emplace(name, rows_from_json(rows));
            spec.registers.push_back(std::move(r));
        }
        for (const auto& jt : j.at("delta")) {
            StepRule rule;
            for (const auto& a : jt.at("actions")) {
                const std::string s = a.get<std::string>();
                rule.actions.push_back(s == "@weigh" ? AffineAction::weigh()
                                                     : AffineAction::apply_op(s));
            }
            for (const auto& [tau, target] : jt.at("next").items())
                rule.next[tau_from_key(tau)] = {target.at("state").get<std::string>(),
                                                move_from_string(target.at("move"))};
            spec.delta.emplace(std::make_pair(jt.at("state").get<std::string>(),
                                              jt.at("symbol").get<std::string>()),
                               std::move(rule));
        }
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("verifier spec field error: ") + e.what());
    }
}

std::string machine_to_json(const TuringMachineSpec& m, int indent) {
    json j;
    j["name"] = m.name;
    j["flavor"] = m.flavor == TMFlavor::Deterministic ? "deterministic" : "alternating";
    j["states"] = m.states;
    j["initial"] = m.initial;
    j["accept"] = m.accept;
    j["reject"] = m.reject;
    j["tape_alphabet"] = m.tape_alphabet;
    j["input_alphabet"] = m.input_alphabet;
    j["left_end"] = m.left_end;
    j["right_end"] = m.right_end;
    json labels = json::object();
    for (const auto& [q, l] : m.labels)
        labels[q] = l == Quantifier::Existential ? "exists" : "forall";
    j["labels"] = std::move(labels);
    j["outputs"] = m.outputs;
    json trans = json::array();
    for (const auto& [key, branches] : m.transitions)
        for (const auto& t : branches) {
            json jt;
            jt["state"] = key.first;
            jt["read"] = key.second;
            jt["write"] = t.write;
            jt["next"] = t.next;
            jt["move"] = t.move;
            trans.push_back(std::move(jt));
        }
    j["transitions"] = std::move(trans);
    return j.dump(indent);
}

TuringMachineSpec machine_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("machine parse error: ") + e.what());
    }
    try {
        TuringMachineSpec m;
        m.name = j.value("name", "machine");
        m.flavor = j.value("flavor", std::string("deterministic")) == "alternating"
                       ? TMFlavor::Alternating
                       : TMFlavor::Deterministic;
        m.states = j.at("states").get<std::vector<std::string>>();
        m.initial = j.at("initial").get<std::string>();
        m.accept = j.at("accept").get<std::string>();
        m.reject = j.at("reject").get<std::string>();
        m.tape_alphabet = j.at("tape_alphabet").get<std::vector<std::string>>();
        m.input_alphabet = j.at("input_alphabet").get<std::vector<std::string>>();
        m.left_end = j.value("left_end", std::string("¢"));
        m.right_end = j.value("right_end", std::string("$"));
        const json labels_in = j.value("labels", json::object());
        for (const auto& [q, l] : labels_in.items())
            m.labels[q] = l.get<std::string>() == "exists" ? Quantifier::Existential
                                                           : Quantifier::Universal;
        m.outputs = j.value("outputs", std::map<std::string, std::string>{});
        for (const auto& jt : j.at("transitions")) {
            TMTransition t;
            t.write = jt.at("write").get<std::string>();
            t.next = jt.at("next").get<std::string>();
            t.move = jt.at("move").get<int>();
            m.transitions[{jt.at("state").get<std::string>(), jt.at("read").get<std::string>()}]
                .push_back(std::move(t));
        }
        return m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("machine field error: ") + e.what());
    }
}

}  // namespace affam
