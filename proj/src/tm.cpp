#include "affam/tm.hpp"

#include <algorithm>
#include <set>

namespace affam {

std::string config_to_string(const TMConfig& c) {
    std::string s;
    for (const auto& sym : c) s += sym;
    return s;
}

TuringMachineSpec finalize_machine(TuringMachineSpec m) {
    std::set<std::string> state_set(m.states.begin(), m.states.end());
    if (state_set.size() != m.states.size()) throw MachineError("duplicate state names");
    for (const auto& q : {m.initial, m.accept, m.reject})
        if (!state_set.count(q)) throw MachineError("missing machine state '" + q + "'");
    if (m.accept == m.reject) throw MachineError("accept and reject states must differ");

    std::set<std::string> tape_set(m.tape_alphabet.begin(), m.tape_alphabet.end());
    if (tape_set.size() != m.tape_alphabet.size()) throw MachineError("duplicate tape symbols");
    if (!tape_set.count(m.left_end) || !tape_set.count(m.right_end))
        throw MachineError("boundary symbols must be in the tape alphabet");
    for (const auto& s : m.input_alphabet) {
        if (!tape_set.count(s)) throw MachineError("input symbol '" + s + "' not on the tape");
        if (s == m.left_end || s == m.right_end)
            throw MachineError("boundary symbols cannot be input symbols");
    }
    for (const auto& s : m.tape_alphabet) {
        if (state_set.count(s)) throw MachineError("symbol '" + s + "' is also a state");
        if (s == "#" || s == "?") throw MachineError("'#' and '?' are reserved");
    }
    for (const auto& q : m.states)
        if (q == "#" || q == "?") throw MachineError("'#' and '?' are reserved");

    for (const auto& [q, lab] : m.labels) {
        (void)lab;
        if (!state_set.count(q)) throw MachineError("label on unknown state '" + q + "'");
        if (m.flavor != TMFlavor::Alternating)
            throw MachineError("quantifier labels require the alternating flavor");
    }

    for (auto& [key, branches] : m.transitions) {
        const auto& [q, sym] = key;
        if (!state_set.count(q)) throw MachineError("transition from unknown state '" + q + "'");
        if (q == m.accept || q == m.reject)
            throw MachineError("halting state '" + q + "' has transitions");
        if (!tape_set.count(sym)) throw MachineError("transition on unknown symbol '" + sym + "'");
        for (auto& t : branches) {
            if (!tape_set.count(t.write))
                throw MachineError("transition writes unknown symbol '" + t.write + "'");
            if (!state_set.count(t.next))
                throw MachineError("transition targets unknown state '" + t.next + "'");
            if (t.move < -1 || t.move > 1) throw MachineError("bad head move");
            if (sym == m.left_end && (t.write != m.left_end || t.move != 1))
                throw MachineError("on the left boundary the machine must rewrite it and move right");
            if (sym == m.right_end && (t.write != m.right_end || t.move == 1))
                throw MachineError("on the right boundary the machine must rewrite it and stay or move left");
            if (sym != m.left_end && sym != m.right_end &&
                (t.write == m.left_end || t.write == m.right_end))
                throw MachineError("interior cells may only be overwritten with interior symbols");
        }
        const bool branching = m.labels.count(q) > 0;
        if (branching) {
            if (branches.size() == 1) branches.push_back(branches.front());  // pad dummy branch
            if (branches.size() != 2)
                throw MachineError("branching state '" + q + "' needs exactly two branches");
        } else if (branches.size() != 1) {
            throw MachineError("state '" + q + "' is unlabeled but branches");
        }
    }

    // Totalize: anything unspecified walks into the rejecting state.
    for (const auto& q : m.states) {
        if (q == m.accept || q == m.reject) continue;
        for (const auto& sym : m.tape_alphabet) {
            auto& slot = m.transitions[{q, sym}];
            if (!slot.empty()) continue;
            if (sym == m.left_end)
                slot.push_back({m.left_end, m.reject, +1});
            else
                slot.push_back({sym, m.reject, 0});
            if (m.labels.count(q)) slot.push_back(slot.front());
        }
    }
    return m;
}

bool TuringMachine::is_state(const std::string& sym) const {
    return std::find(spec_.states.begin(), spec_.states.end(), sym) != spec_.states.end();
}

TMConfig TuringMachine::initial_config(const std::vector<std::string>& w) const {
    std::set<std::string> input_set(spec_.input_alphabet.begin(), spec_.input_alphabet.end());
    TMConfig c;
    c.reserve(w.size() + 3);
    c.push_back(spec_.initial);
    c.push_back(spec_.left_end);
    for (const auto& s : w) {
        if (!input_set.count(s))
            throw AlphabetError("input symbol '" + s + "' outside the machine's input alphabet");
        c.push_back(s);
    }
    c.push_back(spec_.right_end);
    return c;
}

std::size_t TuringMachine::state_position(const TMConfig& c) const {
    std::size_t pos = c.size();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (is_state(c[i])) {
            if (pos != c.size()) throw MachineError("configuration with two state symbols");
            pos = i;
        }
    }
    if (pos == c.size()) throw MachineError("configuration without a state symbol");
    if (pos + 1 == c.size()) throw MachineError("head past the right boundary");
    return pos;
}

const std::vector<TMTransition>& TuringMachine::step_transitions(const TMConfig& c) const {
    const std::size_t pos = state_position(c);
    const std::string& q = c[pos];
    if (is_halting_state(q)) throw HaltedError("configuration is halting");
    auto it = spec_.transitions.find({q, c[pos + 1]});
    if (it == spec_.transitions.end())
        throw MachineError("no transition for (" + q + ", " + c[pos + 1] + ")");
    return it->second;
}

std::vector<TMConfig> TuringMachine::next_config(const TMConfig& c) const {
    const std::size_t pos = state_position(c);
    std::vector<TMConfig> out;
    for (const auto& t : step_transitions(c)) {
        TMConfig n;
        n.reserve(c.size());
        // u = c[0..pos-1], scanned = c[pos+1], rest = c[pos+2..]
        if (t.move == 1) {
            n.insert(n.end(), c.begin(), c.begin() + pos);
            n.push_back(t.write);
            n.push_back(t.next);
        } else if (t.move == 0) {
            n.insert(n.end(), c.begin(), c.begin() + pos);
            n.push_back(t.next);
            n.push_back(t.write);
        } else {
            if (pos == 0) throw MachineError("left move with the head on the leftmost cell");
            n.insert(n.end(), c.begin(), c.begin() + (pos - 1));
            n.push_back(t.next);
            n.push_back(c[pos - 1]);
            n.push_back(t.write);
        }
        n.insert(n.end(), c.begin() + pos + 2, c.end());
        out.push_back(std::move(n));
    }
    return out;
}

TuringMachine::Stream TuringMachine::honest_stream(const std::vector<std::string>& w,
                                                   std::size_t max_steps) const {
    if (spec_.flavor != TMFlavor::Deterministic)
        throw FlavorError("honest streams require a deterministic machine");
    Stream s;
    s.configs.push_back(initial_config(w));
    for (std::size_t i = 0; i < max_steps; ++i) {
        const TMConfig& cur = s.configs.back();
        if (is_halting_state(cur[state_position(cur)])) return s;
        s.configs.push_back(next_config(cur).front());
    }
    const TMConfig& last = s.configs.back();
    s.truncated = !is_halting_state(last[state_position(last)]);
    return s;
}

bool TuringMachine::atm_accepts(const std::vector<std::string>& w, std::size_t max_depth) const {
    if (spec_.flavor != TMFlavor::Alternating)
        throw FlavorError("tree acceptance requires an alternating machine");

    auto eval = [&](auto&& self, const TMConfig& c, std::size_t depth) -> bool {
        const std::string& q = c[state_position(c)];
        if (q == spec_.accept) return true;
        if (q == spec_.reject) return false;
        if (depth == 0) throw MachineError("alternating run exceeded the depth bound");
        auto succ = next_config(c);
        if (succ.size() == 1) return self(self, succ[0], depth - 1);
        const auto lab = spec_.labels.at(q);
        const bool left = self(self, succ[0], depth - 1);
        if (lab == Quantifier::Existential) return left || self(self, succ[1], depth - 1);
        return left && self(self, succ[1], depth - 1);
    };
    return eval(eval, initial_config(w), max_depth);
}

bool TuringMachine::dtm_accepts(const std::vector<std::string>& w, std::size_t max_steps) const {
    auto s = honest_stream(w, max_steps);
    if (s.truncated) throw MachineError("deterministic run exceeded the step bound");
    const TMConfig& last = s.configs.back();
    return last[state_position(last)] == spec_.accept;
}

std::vector<std::string> TuringMachine::extract_output(const std::vector<TMConfig>& configs) const {
    std::vector<std::string> out;
    for (const auto& c : configs) {
        const std::string& q = c[state_position(c)];
        auto it = spec_.outputs.find(q);
        if (it != spec_.outputs.end()) out.push_back(it->second);
    }
    return out;
}

std::vector<std::string> config_alphabet(const TuringMachineSpec& m) {
    std::vector<std::string> a = m.tape_alphabet;
    a.insert(a.end(), m.states.begin(), m.states.end());
    a.push_back("#");
    return a;
}

mpz_class config_value(const TuringMachineSpec& m, const TMConfig& c) {
    const auto alphabet = config_alphabet(m);
    const long base = static_cast<long>(alphabet.size());
    mpz_class v = 0;
    for (const auto& sym : c) {
        auto it = std::find(alphabet.begin(), alphabet.end(), sym);
        if (it == alphabet.end()) throw AlphabetError("symbol '" + sym + "' not encodable");
        v = v * base + static_cast<long>(it - alphabet.begin());
    }
    return v;
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

namespace {

TuringMachineSpec make_zeros_then_ones() {
    TuringMachineSpec m;
    m.name = "zeros_then_ones";
    m.states = {"i", "s", "r", "l", "c", "qa", "qr"};
    m.initial = "i";
    m.accept = "qa";
    m.reject = "qr";
    m.tape_alphabet = {"0", "1", "X", "Y", "¢", "$"};
    m.input_alphabet = {"0", "1"};
    auto add = [&](const std::string& q, const std::string& sym, const std::string& w,
                   const std::string& n, int mv) { m.transitions[{q, sym}] = {{w, n, mv}}; };
    add("i", "¢", "¢", "s", +1);
    add("s", "0", "X", "r", +1);
    add("s", "Y", "Y", "c", +1);
    add("s", "1", "1", "qr", 0);
    add("s", "$", "$", "qa", 0);
    add("r", "0", "0", "r", +1);
    add("r", "Y", "Y", "r", +1);
    add("r", "1", "Y", "l", -1);
    add("r", "$", "$", "qr", 0);
    add("l", "0", "0", "l", -1);
    add("l", "Y", "Y", "l", -1);
    add("l", "X", "X", "s", +1);
    add("c", "Y", "Y", "c", +1);
    add("c", "0", "0", "qr", 0);
    add("c", "1", "1", "qr", 0);
    add("c", "$", "$", "qa", 0);
    return m;
}

TuringMachineSpec make_palindrome() {
    TuringMachineSpec m;
    m.name = "palindrome";
    m.states = {"i", "p", "fa", "fb", "ca", "cb", "bk", "qa", "qr"};
    m.initial = "i";
    m.accept = "qa";
    m.reject = "qr";
    m.tape_alphabet = {"a", "b", "X", "¢", "$"};
    m.input_alphabet = {"a", "b"};
    auto add = [&](const std::string& q, const std::string& sym, const std::string& w,
                   const std::string& n, int mv) { m.transitions[{q, sym}] = {{w, n, mv}}; };
    add("i", "¢", "¢", "p", +1);
    add("p", "a", "X", "fa", +1);
    add("p", "b", "X", "fb", +1);
    add("p", "X", "X", "qa", 0);
    add("p", "$", "$", "qa", 0);
    for (const std::string sy : {"a", "b"}) {
        add("fa", sy, sy, "fa", +1);
        add("fb", sy, sy, "fb", +1);
        add("bk", sy, sy, "bk", -1);
    }
    add("fa", "X", "X", "ca", -1);
    add("fa", "$", "$", "ca", -1);
    add("fb", "X", "X", "cb", -1);
    add("fb", "$", "$", "cb", -1);
    add("ca", "a", "X", "bk", -1);
    add("ca", "b", "b", "qr", 0);
    add("ca", "X", "X", "qa", 0);
    add("cb", "b", "X", "bk", -1);
    add("cb", "a", "a", "qr", 0);
    add("cb", "X", "X", "qa", 0);
    add("bk", "X", "X", "p", +1);
    return m;
}

TuringMachineSpec make_first_two_equal() {
    TuringMachineSpec m;
    m.name = "first_two_equal";
    m.flavor = TMFlavor::Alternating;
    m.states = {"g", "u0", "u1", "k0", "k1", "m0", "m1", "qa", "qr"};
    m.initial = "g";
    m.accept = "qa";
    m.reject = "qr";
    m.tape_alphabet = {"0", "1", "¢", "$"};
    m.input_alphabet = {"0", "1"};
    m.labels = {{"g", Quantifier::Existential}, {"u0", Quantifier::Universal},
                {"u1", Quantifier::Universal}};
    // The prover picks a digit at the existential start; the two universal
    // branches are identical (padded), then a deterministic check that the
    // first two input symbols both equal the pick.
    m.transitions[{"g", "¢"}] = {{"¢", "u0", +1}, {"¢", "u1", +1}};
    for (const std::string b : {"0", "1"}) {
        const std::string u = "u" + b, k = "k" + b, mm = "m" + b;
        for (const std::string sy : {"0", "1"})
            m.transitions[{u, sy}] = {{sy, k, 0}};  // finalize pads the second branch
        m.transitions[{u, "$"}] = {{"$", "qr", 0}};
        for (const std::string sy : {"0", "1"})
            m.transitions[{k, sy}] = {{sy, sy == b ? mm : "qr", sy == b ? +1 : 0}};
        for (const std::string sy : {"0", "1"})
            m.transitions[{mm, sy}] = {{sy, sy == b ? "qa" : "qr", 0}};
        m.transitions[{mm, "$"}] = {{"$", "qr", 0}};
    }
    return m;
}

TuringMachineSpec make_exists_forall_equal() {
    // Same language as first_two_equal, but the universal side genuinely
    // branches: it picks which of the two positions gets checked against the
    // existential digit. Non-members then leave accepting paths behind some
    // coin outcomes, which exercises the soundness averaging.
    TuringMachineSpec m;
    m.name = "exists_forall_equal";
    m.flavor = TMFlavor::Alternating;
    m.states = {"g", "u0", "u1", "p0", "p1", "s0", "s1", "qa", "qr"};
    m.initial = "g";
    m.accept = "qa";
    m.reject = "qr";
    m.tape_alphabet = {"0", "1", "¢", "$"};
    m.input_alphabet = {"0", "1"};
    m.labels = {{"g", Quantifier::Existential}, {"u0", Quantifier::Universal},
                {"u1", Quantifier::Universal}};
    m.transitions[{"g", "¢"}] = {{"¢", "u0", +1}, {"¢", "u1", +1}};
    for (const std::string b : {"0", "1"}) {
        const std::string u = "u" + b, pp = "p" + b, ss = "s" + b;
        for (const std::string sy : {"0", "1"})
            m.transitions[{u, sy}] = {{sy, pp, 0}, {sy, ss, +1}};
        m.transitions[{u, "$"}] = {{"$", "qr", 0}};
        for (const std::string sy : {"0", "1"}) {
            m.transitions[{pp, sy}] = {{sy, sy == b ? "qa" : "qr", 0}};
            m.transitions[{ss, sy}] = {{sy, sy == b ? "qa" : "qr", 0}};
        }
        m.transitions[{pp, "$"}] = {{"$", "qr", 0}};
        m.transitions[{ss, "$"}] = {{"$", "qr", 0}};
    }
    return m;
}

TuringMachineSpec make_parity_kg_reduction() {
    TuringMachineSpec m;
    m.name = "parity_kg_reduction";
    m.tape_alphabet = {"0", "1", "¢", "$"};
    m.input_alphabet = {"0", "1"};
    m.initial = "se";
    m.accept = "qa";
    m.reject = "qr";
    // Scan once tracking the parity of 1s, then emit a knapsack-game instance
    // one symbol per step while parked at the right boundary:
    //   even parity -> 10A1,0E1,10   (S=2, pair (1,0) / (1,2): a member)
    //   odd parity  -> 1A1,0E1,10    (S=1 with the same pair: not a member)
    const std::string even_out = "10A1,0E1,10";
    const std::string odd_out = "1A1,0E1,10";
    std::vector<std::string> states = {"se", "so", "qa", "qr"};
    auto chain = [&](const std::string& prefix, const std::string& word) {
        for (std::size_t i = 0; i < word.size(); ++i) {
            const std::string q = prefix + std::to_string(i);
            states.push_back(q);
            m.outputs[q] = std::string(1, word[i]);
            const std::string next = i + 1 < word.size() ? prefix + std::to_string(i + 1) : "qa";
            m.transitions[{q, "$"}] = {{"$", next, 0}};
        }
    };
    chain("e", even_out);
    chain("o", odd_out);
    m.states = states;
    m.transitions[{"se", "¢"}] = {{"¢", "se", +1}};
    m.transitions[{"se", "0"}] = {{"0", "se", +1}};
    m.transitions[{"se", "1"}] = {{"1", "so", +1}};
    m.transitions[{"so", "0"}] = {{"0", "so", +1}};
    m.transitions[{"so", "1"}] = {{"1", "se", +1}};
    m.transitions[{"se", "$"}] = {{"$", "e0", 0}};
    m.transitions[{"so", "$"}] = {{"$", "o0", 0}};
    return m;
}

}  // namespace

std::map<std::string, TuringMachineSpec> sample_machines() {
    std::map<std::string, TuringMachineSpec> out;
    for (auto&& m : {make_zeros_then_ones(), make_palindrome(), make_first_two_equal(),
                     make_exists_forall_equal(), make_parity_kg_reduction()})
        out.emplace(m.name, m);
    return out;
}

}  // namespace affam
