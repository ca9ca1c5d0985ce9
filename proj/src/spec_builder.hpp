#pragma once

// Internal plumbing for assembling VerifierSpecs; not installed.

#include <map>
#include <string>
#include <vector>

#include "affam/errors.hpp"
#include "affam/machine.hpp"

namespace affam::detail {

struct SpecBuilder {
    VerifierSpec spec;

    explicit SpecBuilder(Mode mode) { spec.mode = mode; }

    std::size_t add_register(const std::string& name, std::size_t dim,
                             std::vector<int> accept_outcomes = {}) {
        RegisterDef r;
        r.name = name;
        r.dim = dim;
        r.accept_outcomes = std::move(accept_outcomes);
        spec.registers.push_back(std::move(r));
        return spec.registers.size() - 1;
    }

    void add_op(std::size_t reg, const std::string& name, AffineOperator op) {
        spec.registers[reg].operators.emplace(name, std::move(op));
    }

    void state(const std::string& name) {
        if (!seen_states_.count(name)) {
            seen_states_.insert(name);
            spec.states.push_back(name);
        }
    }

    std::vector<AffineAction> ids() const {
        return std::vector<AffineAction>(spec.registers.size(), AffineAction::apply_op("I"));
    }

    // Single-outcome rule (no weighting among the actions).
    void rule(const std::string& from, const std::string& symbol, std::vector<AffineAction> actions,
              const std::string& to, Move move) {
        state(from);
        state(to);
        StepRule r;
        r.actions = std::move(actions);
        r.next[std::vector<int>(spec.registers.size(), 0)] = {to, move};
        if (!spec.delta.emplace(std::make_pair(from, symbol), std::move(r)).second)
            throw SpecError("duplicate transition (" + from + ", " + symbol + ")");
    }

    // Rule that weighs exactly one register; `targets[outcome]` (1-based).
    void weigh_rule(const std::string& from, const std::string& symbol, std::size_t reg,
                    const std::vector<std::pair<std::string, Move>>& targets) {
        state(from);
        StepRule r;
        r.actions = ids();
        r.actions[reg] = AffineAction::weigh();
        if (targets.size() != spec.registers[reg].dim)
            throw SpecError("weigh rule needs one target per outcome");
        for (std::size_t o = 1; o <= targets.size(); ++o) {
            state(targets[o - 1].first);
            std::vector<int> tau(spec.registers.size(), 0);
            tau[reg] = static_cast<int>(o);
            r.next[tau] = {targets[o - 1].first, targets[o - 1].second};
        }
        if (!spec.delta.emplace(std::make_pair(from, symbol), std::move(r)).second)
            throw SpecError("duplicate transition (" + from + ", " + symbol + ")");
    }

    void comm(const std::string& from, const std::string& writes,
              const std::map<std::string, std::string>& on_reply) {
        state(from);
        for (const auto& [g, t] : on_reply) {
            (void)g;
            state(t);
        }
        spec.communication[from] = CommRule{writes, on_reply};
    }

    // Fills every missing (state, symbol) pair with a jump to `sink`.
    void totalize(const std::string& sink) {
        std::vector<std::string> symbols = spec.input_alphabet;
        symbols.push_back(kLeftMarker);
        symbols.push_back(kRightMarker);
        const Move mv = spec.mode == Mode::OneWay ? Move::Right : Move::Stay;
        for (const auto& q : spec.states) {
            if (spec.accept_states.count(q) || spec.reject_states.count(q) ||
                spec.restart_states.count(q) || spec.communication.count(q))
                continue;
            for (const auto& sym : symbols) {
                if (spec.delta.count({q, sym})) continue;
                StepRule r;
                r.actions = ids();
                Move m = mv;
                if (spec.mode == Mode::TwoWay) m = Move::Stay;
                r.next[std::vector<int>(spec.registers.size(), 0)] = {sink, m};
                spec.delta.emplace(std::make_pair(q, sym), std::move(r));
            }
        }
    }

private:
    std::set<std::string> seen_states_;
};

void require_epsilon(const Rational& epsilon, bool allow_half = false);
std::vector<long> first_primes(std::size_t n);

}  // namespace affam::detail
