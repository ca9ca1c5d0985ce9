#pragma once

#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "affam/errors.hpp"

namespace affam {

// ---------------------------------------------------------------------------
// Single-tape Turing machines over the input region: the head stays between
// the machine's own boundary symbols, so every configuration string has the
// fixed length |w| + 3 (one state symbol plus the bounded tape).
// ---------------------------------------------------------------------------

enum class TMFlavor { Deterministic, Alternating };
enum class Quantifier { Existential, Universal };

struct TMTransition {
    std::string write;
    std::string next;
    int move = 0;  // -1, 0, +1
};

struct TuringMachineSpec {
    std::string name;
    TMFlavor flavor = TMFlavor::Deterministic;
    std::vector<std::string> states;
    std::string initial;
    std::string accept;
    std::string reject;
    std::vector<std::string> tape_alphabet;   // includes the two boundary symbols
    std::vector<std::string> input_alphabet;  // subset of tape_alphabet
    std::string left_end = "¢";
    std::string right_end = "$";
    std::map<std::string, Quantifier> labels;    // branching states (alternating flavor)
    std::map<std::string, std::string> outputs;  // state -> emitted symbol (reduction machines)
    std::map<std::pair<std::string, std::string>, std::vector<TMTransition>> transitions;
};

// Configuration c = u q v as a flat symbol sequence with exactly one state
// symbol; the head is on the leftmost symbol of v.
using TMConfig = std::vector<std::string>;

std::string config_to_string(const TMConfig& c);

// Normalizes and checks a machine:
//  - missing (state, symbol) entries are filled with a move to the rejecting
//    state (boundary-respecting writes),
//  - on the left boundary the machine must rewrite it and move right; on the
//    right boundary it must rewrite it and not move right,
//  - interior cells are only overwritten with interior symbols,
//  - deterministic flavor: exactly one transition everywhere; alternating:
//    labeled states get exactly two branches (single branches are padded with
//    a duplicate), unlabeled states exactly one.
// Throws MachineError on anything that cannot be repaired.
TuringMachineSpec finalize_machine(TuringMachineSpec m);

class TuringMachine {
public:
    explicit TuringMachine(TuringMachineSpec spec) : spec_(finalize_machine(std::move(spec))) {}

    const TuringMachineSpec& spec() const { return spec_; }

    bool is_state(const std::string& sym) const;
    bool is_halting_state(const std::string& q) const {
        return q == spec_.accept || q == spec_.reject;
    }

    TMConfig initial_config(const std::vector<std::string>& w) const;  // q0 ¢ w $

    // Position of the unique state symbol; MachineError if malformed.
    std::size_t state_position(const TMConfig& c) const;

    // One step: a single successor for deterministic transitions, two for a
    // branching transition of an alternating machine. HaltedError when the
    // configuration is halting.
    std::vector<TMConfig> next_config(const TMConfig& c) const;

    // The transitions that next_config would take, in branch order.
    const std::vector<TMTransition>& step_transitions(const TMConfig& c) const;

    struct Stream {
        std::vector<TMConfig> configs;
        bool truncated = false;
    };

    // c0 followed by successors until the first halting configuration or
    // max_steps. Deterministic flavor only (FlavorError).
    Stream honest_stream(const std::vector<std::string>& w, std::size_t max_steps) const;

    // Alternating-machine acceptance by exhaustive tree evaluation;
    // MachineError if some path exceeds max_depth.
    bool atm_accepts(const std::vector<std::string>& w, std::size_t max_depth) const;

    // Deterministic run verdict; MachineError past max_steps.
    bool dtm_accepts(const std::vector<std::string>& w, std::size_t max_steps) const;

    // Output symbols emitted along a configuration sequence, in order
    // (reduction machines attach them to states).
    std::vector<std::string> extract_output(const std::vector<TMConfig>& configs) const;

private:
    TuringMachineSpec spec_;
};

// Ordered alphabet for configuration encoding: tape symbols, then states,
// then the block separator "#". The digit of a symbol is its index; the base
// is the alphabet size.
std::vector<std::string> config_alphabet(const TuringMachineSpec& m);

// Exact base-|alphabet| value of a configuration, most significant symbol
// first. This is the quantity the streaming verifier accumulates.
mpz_class config_value(const TuringMachineSpec& m, const TMConfig& c);

// Desk-scale fixture catalog:
//   zeros_then_ones      decider for 0^n 1^n
//   palindrome           decider for palindromes over {a, b}
//   first_two_equal      toy alternating machine (one exists/forall
//                        alternation, padded universal branches)
//   exists_forall_equal  same language with a material universal branch
//   parity_kg_reduction  linear-space reduction emitting a knapsack-game
//                        instance (membership: even number of 1s)
std::map<std::string, TuringMachineSpec> sample_machines();

}  // namespace affam
