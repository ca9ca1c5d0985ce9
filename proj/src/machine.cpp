#include "affam/machine.hpp"

#include <algorithm>
#include <sstream>

#include "affam/errors.hpp"

namespace affam {

Word word_from_chars(const std::string& s) {
    Word w;
    w.reserve(s.size());
    for (char c : s) w.push_back(std::string(1, c));
    return w;
}

std::string word_to_string(const Word& w) {
    std::string s;
    for (const auto& sym : w) s += sym;
    return s;
}

std::size_t Transcript::reply_count() const {
    std::size_t n = 0;
    for (const auto& e : events)
        if (e.kind == Event::Kind::ProverReplied) ++n;
    return n;
}

std::optional<int> Transcript::last_reply() const {
    for (auto it = events.rbegin(); it != events.rend(); ++it)
        if (it->kind == Event::Kind::ProverReplied) return it->a;
    return std::nullopt;
}

std::vector<int> Transcript::replies() const {
    std::vector<int> r;
    for (const auto& e : events)
        if (e.kind == Event::Kind::ProverReplied) r.push_back(e.a);
    return r;
}

std::vector<int> Transcript::outcomes() const {
    std::vector<int> r;
    for (const auto& e : events)
        if (e.kind == Event::Kind::Outcome) r.push_back(e.b);
    return r;
}

std::string Transcript::key() const {
    std::ostringstream os;
    for (const auto& e : events) {
        switch (e.kind) {
            case Event::Kind::StateChange: os << 'S' << e.a; break;
            case Event::Kind::HeadMove: os << 'H' << e.a; break;
            case Event::Kind::Outcome: os << 'O' << e.a << ':' << e.b; break;
            case Event::Kind::VerifierWrote: os << 'W' << e.a; break;
            case Event::Kind::ProverReplied: os << 'R' << e.a; break;
        }
        os << ';';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

bool is_marker(const std::string& s) { return s == kLeftMarker || s == kRightMarker; }

// Enumerates the required outcome-vector keys for a rule.
void outcome_keys(const std::vector<AffineAction>& actions, const std::vector<RegisterDef>& regs,
                  std::vector<std::vector<int>>& out) {
    out.clear();
    out.push_back(std::vector<int>(actions.size(), 0));
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (actions[i].kind != AffineAction::Kind::Weigh) continue;
        std::vector<std::vector<int>> next;
        for (const auto& key : out)
            for (std::size_t o = 1; o <= regs[i].dim; ++o) {
                auto k = key;
                k[i] = static_cast<int>(o);
                next.push_back(std::move(k));
            }
        out = std::move(next);
    }
}

}  // namespace

std::vector<std::string> VerifierSpec::validate() const {
    std::vector<std::string> bad;
    auto flag = [&](const std::string& msg) { bad.push_back(msg); };

    std::set<std::string> state_set(states.begin(), states.end());
    if (states.empty()) flag("no states");
    if (state_set.size() != states.size()) flag("duplicate state names");
    if (!state_set.count(initial)) flag("initial state '" + initial + "' not in state list");

    auto check_subset = [&](const std::set<std::string>& s, const std::string& what) {
        for (const auto& q : s)
            if (!state_set.count(q)) flag(what + " state '" + q + "' not in state list");
    };
    check_subset(accept_states, "accept");
    check_subset(reject_states, "reject");
    check_subset(restart_states, "restart");
    for (const auto& q : accept_states)
        if (reject_states.count(q) || restart_states.count(q))
            flag("state '" + q + "' is in more than one halting set");
    for (const auto& q : reject_states)
        if (restart_states.count(q)) flag("state '" + q + "' is in more than one halting set");
    if (mode == Mode::OneWay && (!reject_states.empty() || !restart_states.empty()))
        flag("one-way specs have no reject or restart state sets");

    std::set<std::string> input_set(input_alphabet.begin(), input_alphabet.end());
    if (input_set.size() != input_alphabet.size()) flag("duplicate input symbols");
    for (const auto& s : input_alphabet)
        if (is_marker(s)) flag("input alphabet may not contain the reserved marker '" + s + "'");
    std::set<std::string> gamma_set(gamma.begin(), gamma.end());
    if (gamma_set.size() != gamma.size()) flag("duplicate communication symbols");
    for (const auto& s : gamma)
        if (is_marker(s)) flag("communication alphabet may not contain the marker '" + s + "'");

    for (const auto& reg : registers) {
        if (reg.dim < 1) flag("register '" + reg.name + "' has dimension 0");
        for (const auto& [name, op] : reg.operators) {
            if (op.dim() != reg.dim)
                flag("operator '" + name + "' of register '" + reg.name + "' has wrong dimension");
            else if (!op.columns_sum_to_one())
                flag("operator '" + name + "' of register '" + reg.name +
                     "' has a column not summing to 1");
        }
        for (int o : reg.accept_outcomes)
            if (o < 1 || static_cast<std::size_t>(o) > reg.dim)
                flag("register '" + reg.name + "' accepting outcome out of range");
    }

    std::set<std::string> halting;
    for (const auto& q : accept_states) halting.insert(q);
    for (const auto& q : reject_states) halting.insert(q);
    for (const auto& q : restart_states) halting.insert(q);

    for (const auto& [q, rule] : communication) {
        if (!state_set.count(q)) flag("communication state '" + q + "' not in state list");
        if (halting.count(q)) flag("halting state '" + q + "' cannot be a communication state");
        if (!gamma_set.count(rule.writes))
            flag("communication state '" + q + "' writes a symbol outside the alphabet");
        for (const auto& g : gamma)
            if (!rule.on_reply.count(g))
                flag("communication state '" + q + "' has no transition for reply '" + g + "'");
        for (const auto& [g, target] : rule.on_reply) {
            if (!gamma_set.count(g))
                flag("communication state '" + q + "' maps unknown reply '" + g + "'");
            if (!state_set.count(target))
                flag("communication state '" + q + "' reply target '" + target + "' unknown");
        }
    }

    std::vector<std::string> tape_symbols = input_alphabet;
    tape_symbols.push_back(kLeftMarker);
    tape_symbols.push_back(kRightMarker);

    std::vector<std::vector<int>> expect_keys;
    for (const auto& q : states) {
        if (communication.count(q) || halting.count(q)) continue;
        for (const auto& sym : tape_symbols) {
            auto it = delta.find({q, sym});
            if (it == delta.end()) {
                flag("no transition for state '" + q + "' on symbol '" + sym + "'");
                continue;
            }
            const StepRule& rule = it->second;
            if (rule.actions.size() != registers.size()) {
                flag("transition (" + q + ", " + sym + ") has wrong action count");
                continue;
            }
            bool action_ok = true;
            for (std::size_t i = 0; i < rule.actions.size(); ++i) {
                const auto& act = rule.actions[i];
                if (act.kind == AffineAction::Kind::Apply &&
                    !registers[i].operators.count(act.op)) {
                    flag("transition (" + q + ", " + sym + ") uses unknown operator '" + act.op +
                         "' on register '" + registers[i].name + "'");
                    action_ok = false;
                }
                if (mode == Mode::OneWay && act.kind == AffineAction::Kind::Weigh)
                    flag("one-way transition (" + q + ", " + sym + ") may not weigh mid-run");
            }
            if (!action_ok) continue;
            outcome_keys(rule.actions, registers, expect_keys);
            for (const auto& key : expect_keys)
                if (!rule.next.count(key)) {
                    std::string ks;
                    for (int k : key) ks += std::to_string(k) + ",";
                    flag("transition (" + q + ", " + sym + ") misses outcome combination [" + ks +
                         "]");
                }
            for (const auto& [key, target] : rule.next) {
                if (std::find(expect_keys.begin(), expect_keys.end(), key) == expect_keys.end())
                    flag("transition (" + q + ", " + sym + ") has stray outcome key");
                if (!state_set.count(target.state))
                    flag("transition (" + q + ", " + sym + ") targets unknown state '" +
                         target.state + "'");
                if (mode == Mode::OneWay && target.move != Move::Right)
                    flag("one-way transition (" + q + ", " + sym + ") must move right");
                if (mode == Mode::TwoWay && sym == kLeftMarker && target.move == Move::Left)
                    flag("transition (" + q + ", " + sym + ") walks off the left marker");
                if (mode == Mode::TwoWay && sym == kRightMarker && target.move == Move::Right)
                    flag("transition (" + q + ", " + sym + ") walks off the right marker");
            }
        }
    }

    for (const auto& [key, rule] : delta) {
        (void)rule;
        if (!state_set.count(key.first)) flag("transition from unknown state '" + key.first + "'");
        if (communication.count(key.first))
            flag("communication state '" + key.first + "' also has a tape transition");
        if (halting.count(key.first))
            flag("halting state '" + key.first + "' has an outgoing transition");
        if (std::find(tape_symbols.begin(), tape_symbols.end(), key.second) == tape_symbols.end())
            flag("transition on unknown symbol '" + key.second + "'");
    }

    return bad;
}

// ---------------------------------------------------------------------------
// Machine (compiled form)
// ---------------------------------------------------------------------------

Machine::Machine(VerifierSpec spec) : spec_(std::move(spec)) {
    auto bad = spec_.validate();
    if (!bad.empty()) {
        std::string msg = "invalid verifier spec:";
        for (std::size_t i = 0; i < bad.size() && i < 8; ++i) msg += "\n  " + bad[i];
        if (bad.size() > 8) msg += "\n  (+" + std::to_string(bad.size() - 8) + " more)";
        throw SpecError(msg);
    }

    auto intern = [&](const std::string& name) {
        auto it = sym_ids_.find(name);
        if (it != sym_ids_.end()) return it->second;
        int id = static_cast<int>(sym_names_.size());
        sym_ids_.emplace(name, id);
        sym_names_.push_back(name);
        return id;
    };
    intern(kLeftMarker);
    intern(kRightMarker);
    for (const auto& s : spec_.input_alphabet) intern(s);
    for (const auto& g : spec_.gamma) gamma_ids_.push_back(intern(g));

    for (std::size_t i = 0; i < spec_.states.size(); ++i)
        state_ids_.emplace(spec_.states[i], static_cast<int>(i));

    const std::size_t ns = spec_.states.size();
    state_class_.assign(ns, 0);
    for (const auto& q : spec_.accept_states) state_class_[state_ids_[q]] = 1;
    for (const auto& q : spec_.reject_states) state_class_[state_ids_[q]] = 2;
    for (const auto& q : spec_.restart_states) state_class_[state_ids_[q]] = 3;

    comm_write_.assign(ns, -1);
    comm_reply_.assign(ns, {});
    for (const auto& [q, rule] : spec_.communication) {
        int s = state_ids_[q];
        comm_write_[s] = sym_ids_.at(rule.writes);
        for (const auto& [g, target] : rule.on_reply)
            comm_reply_[s][sym_ids_.at(g)] = state_ids_.at(target);
    }

    reg_ops_.resize(spec_.registers.size());
    reg_op_ids_.resize(spec_.registers.size());
    for (std::size_t r = 0; r < spec_.registers.size(); ++r)
        for (const auto& [name, op] : spec_.registers[r].operators) {
            reg_op_ids_[r][name] = static_cast<int>(reg_ops_[r].size());
            reg_ops_[r].push_back(op);
        }

    const std::size_t nsym = sym_names_.size();
    rules_.assign(ns, std::vector<std::vector<CompiledRule>>(nsym));
    for (const auto& [key, rule] : spec_.delta) {
        int s = state_ids_.at(key.first);
        int sym = sym_ids_.at(key.second);
        CompiledRule cr;
        cr.action_ops.resize(rule.actions.size());
        for (std::size_t i = 0; i < rule.actions.size(); ++i) {
            if (rule.actions[i].kind == AffineAction::Kind::Weigh) {
                cr.action_ops[i] = -1;
                cr.any_weigh = true;
            } else {
                cr.action_ops[i] = reg_op_ids_[i].at(rule.actions[i].op);
            }
        }
        for (const auto& [tau, target] : rule.next)
            cr.next[tau] = {state_ids_.at(target.state), static_cast<int>(target.move)};
        rules_[s][sym].push_back(std::move(cr));
    }
}

int Machine::symbol_id(const std::string& name) const {
    auto it = sym_ids_.find(name);
    if (it == sym_ids_.end()) throw AlphabetError("unknown symbol '" + name + "'");
    return it->second;
}

std::optional<int> Machine::try_symbol_id(const std::string& name) const {
    auto it = sym_ids_.find(name);
    if (it == sym_ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& Machine::symbol_name(int id) const { return sym_names_.at(id); }

int Machine::state_id(const std::string& name) const {
    auto it = state_ids_.find(name);
    if (it == state_ids_.end()) throw SpecError("unknown state '" + name + "'");
    return it->second;
}

const std::string& Machine::state_name(int id) const {
    return spec_.states.at(static_cast<std::size_t>(id));
}

std::vector<int> Machine::tape_from_word(const Word& w) const {
    std::vector<int> tape;
    tape.reserve(w.size() + 2);
    tape.push_back(0);  // <c>
    std::set<std::string> input_set(spec_.input_alphabet.begin(), spec_.input_alphabet.end());
    for (const auto& s : w) {
        if (!input_set.count(s)) throw AlphabetError("input symbol '" + s + "' not in alphabet");
        tape.push_back(symbol_id(s));
    }
    tape.push_back(1);  // <$>
    return tape;
}

Config Machine::initial_config() const {
    Config cfg;
    cfg.state = state_ids_.at(spec_.initial);
    cfg.head = 0;
    for (const auto& reg : spec_.registers) cfg.regs.push_back(AffineState::basis(reg.dim, 1));
    cfg.steps = 0;
    cfg.status = classify(cfg.state, 0, 0);
    return cfg;
}

Config::Status Machine::classify(int state, int head, int tape_len) const {
    switch (state_class_[state]) {
        case 1:
            if (spec_.mode == Mode::OneWay)
                return head >= tape_len && tape_len > 0 ? Config::Status::AwaitFinal
                                                        : Config::Status::Running;
            return Config::Status::Accept;
        case 2: return Config::Status::Reject;
        case 3: return Config::Status::Restart;
        default:
            if (spec_.mode == Mode::OneWay && tape_len > 0 && head >= tape_len)
                return Config::Status::Reject;  // input consumed outside the accepting set
            return Config::Status::Running;
    }
}

BranchSet Machine::step(const Config& cfg, const std::vector<int>& tape,
                        std::optional<int> reply) const {
    if (cfg.status != Config::Status::Running)
        throw HaltedError("step on a non-running configuration");

    const int len = static_cast<int>(tape.size());

    if (is_communication(cfg.state)) {
        if (!reply) throw MissingReplyError("communication state '" + state_name(cfg.state) +
                                            "' needs a prover reply");
        auto it = comm_reply_[cfg.state].find(*reply);
        if (it == comm_reply_[cfg.state].end())
            throw InvalidReplySymbolError("reply symbol id " + std::to_string(*reply) +
                                          " is not in the communication alphabet");
        Branch b;
        b.probability = Rational(1);
        b.config = cfg;
        b.config.state = it->second;
        b.config.steps = cfg.steps + 1;
        b.config.status = classify(it->second, cfg.head, len);
        b.events.push_back({Event::Kind::VerifierWrote, comm_write_[cfg.state], 0});
        b.events.push_back({Event::Kind::ProverReplied, *reply, 0});
        b.events.push_back({Event::Kind::StateChange, it->second, 0});
        return {std::move(b)};
    }
    if (reply) throw InvalidReplySymbolError("reply given outside a communication state");

    const int scanned = tape.at(static_cast<std::size_t>(cfg.head));
    const auto& slot = rules_[cfg.state][scanned];
    if (slot.empty())
        throw SpecError("no transition for state '" + state_name(cfg.state) + "' on symbol '" +
                        sym_names_[scanned] + "'");
    const CompiledRule& rule = slot.front();

    // Affine phase.
    std::vector<AffineState> applied;
    applied.reserve(cfg.regs.size());
    std::vector<std::optional<WeightDistribution>> dists(cfg.regs.size());
    for (std::size_t i = 0; i < cfg.regs.size(); ++i) {
        if (rule.action_ops[i] >= 0) {
            applied.push_back(apply(reg_ops_[i][rule.action_ops[i]], cfg.regs[i]));
        } else {
            applied.push_back(cfg.regs[i]);  // replaced by the collapse below
            dists[i] = weight(cfg.regs[i]);
        }
    }

    // Branch over outcome combinations; zero-probability outcomes are skipped.
    BranchSet out;
    std::vector<int> tau(cfg.regs.size(), 0);
    auto emit = [&](const Rational& prob) {
        auto it = rule.next.find(tau);
        if (it == rule.next.end()) throw SpecError("unmapped outcome combination");
        const auto [next_state, move] = it->second;
        Branch b;
        b.probability = prob;
        b.config.state = next_state;
        b.config.head = spec_.mode == Mode::OneWay ? cfg.head + 1 : cfg.head + move;
        if (b.config.head < 0 || b.config.head > len)
            throw SpecError("head left the tape");
        b.config.steps = cfg.steps + 1;
        b.config.regs.reserve(cfg.regs.size());
        for (std::size_t i = 0; i < cfg.regs.size(); ++i) {
            if (dists[i])
                b.config.regs.push_back(
                    AffineState::basis(cfg.regs[i].dim(), static_cast<std::size_t>(tau[i])));
            else
                b.config.regs.push_back(applied[i]);
        }
        for (std::size_t i = 0; i < cfg.regs.size(); ++i)
            if (dists[i])
                b.events.push_back({Event::Kind::Outcome, static_cast<int>(i), tau[i]});
        b.events.push_back({Event::Kind::StateChange, next_state, 0});
        b.events.push_back({Event::Kind::HeadMove, spec_.mode == Mode::OneWay ? 1 : move, 0});
        b.config.status = classify(next_state, b.config.head, len);
        out.push_back(std::move(b));
    };

    std::vector<std::size_t> weighed;
    for (std::size_t i = 0; i < dists.size(); ++i)
        if (dists[i]) weighed.push_back(i);

    if (weighed.empty()) {
        emit(Rational(1));
        return out;
    }
    // Iterative product over the weighted registers.
    std::vector<std::size_t> idx(weighed.size(), 0);
    while (true) {
        Rational prob(1);
        bool zero = false;
        for (std::size_t k = 0; k < weighed.size(); ++k) {
            const auto& p = dists[weighed[k]]->probabilities[idx[k]];
            if (p.is_zero()) {
                zero = true;
                break;
            }
            prob *= p;
            tau[weighed[k]] = static_cast<int>(idx[k] + 1);
        }
        if (!zero) emit(prob);
        std::size_t k = 0;
        while (k < weighed.size()) {
            if (++idx[k] < dists[weighed[k]]->probabilities.size()) break;
            idx[k] = 0;
            ++k;
        }
        if (k == weighed.size()) break;
    }
    return out;
}

BranchSet Machine::final_weighting(const Config& cfg) const {
    if (spec_.mode != Mode::OneWay)
        throw ModeError("final weighting applies to one-way machines only");
    if (cfg.status != Config::Status::AwaitFinal)
        throw HaltedError("final weighting requires a consumed input in an accepting state");

    std::vector<WeightDistribution> dists;
    dists.reserve(cfg.regs.size());
    for (const auto& r : cfg.regs) dists.push_back(weight(r));

    BranchSet out;
    std::vector<std::size_t> idx(cfg.regs.size(), 0);
    while (true) {
        Rational prob(1);
        bool zero = false;
        for (std::size_t i = 0; i < cfg.regs.size(); ++i) {
            const auto& p = dists[i].probabilities[idx[i]];
            if (p.is_zero()) {
                zero = true;
                break;
            }
            prob *= p;
        }
        if (!zero) {
            bool ok = true;
            Branch b;
            b.probability = prob;
            b.config = cfg;
            b.config.steps = cfg.steps + 1;
            b.config.regs.clear();
            for (std::size_t i = 0; i < cfg.regs.size(); ++i) {
                const int outcome = static_cast<int>(idx[i] + 1);
                b.config.regs.push_back(
                    AffineState::basis(cfg.regs[i].dim(), static_cast<std::size_t>(outcome)));
                b.events.push_back({Event::Kind::Outcome, static_cast<int>(i), outcome});
                const auto& acc = spec_.registers[i].accept_outcomes;
                if (std::find(acc.begin(), acc.end(), outcome) == acc.end()) ok = false;
            }
            b.config.status = ok ? Config::Status::Accept : Config::Status::Reject;
            out.push_back(std::move(b));
        }
        std::size_t i = 0;
        while (i < cfg.regs.size()) {
            if (++idx[i] < dists[i].probabilities.size()) break;
            idx[i] = 0;
            ++i;
        }
        if (i == cfg.regs.size()) break;
    }
    return out;
}

const AffineOperator& Machine::register_operator(std::size_t reg, const std::string& name) const {
    return reg_ops_.at(reg).at(static_cast<std::size_t>(reg_op_ids_.at(reg).at(name)));
}

}  // namespace affam
