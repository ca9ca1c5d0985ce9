#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affam/linalg.hpp"

namespace affam {

// ---------------------------------------------------------------------------
// Verifier data model: one-way and two-way automata with deterministic states
// plus affine registers, communication states, and public-coin disclosure.
// ---------------------------------------------------------------------------

enum class Mode { OneWay, TwoWay };
enum class Move : int { Left = -1, Stay = 0, Right = +1 };

// Reserved names for the verifier's own tape end-markers. Input alphabets may
// freely contain a "$" symbol; it is distinct from the marker.
inline const std::string kLeftMarker = "<c>";
inline const std::string kRightMarker = "<$>";

using Word = std::vector<std::string>;

Word word_from_chars(const std::string& s);  // one symbol per character
std::string word_to_string(const Word& w);

struct RegisterDef {
    std::string name;
    std::size_t dim = 0;
    std::map<std::string, AffineOperator> operators;
    std::vector<int> accept_outcomes;  // one-way final weighting; 1-based
};

struct AffineAction {
    enum class Kind { Apply, Weigh };
    Kind kind = Kind::Apply;
    std::string op;  // operator name when kind == Apply

    static AffineAction apply_op(std::string name) { return {Kind::Apply, std::move(name)}; }
    static AffineAction weigh() { return {Kind::Weigh, {}}; }
};

struct ClassicalTarget {
    std::string state;
    Move move = Move::Right;
};

// One (state, symbol) entry of the transition table. `actions` has one entry
// per register; `next` is keyed by the outcome vector (0 for registers that
// were not weighted, 1-based outcome otherwise) and must cover every
// combination of weighted-register outcomes.
struct StepRule {
    std::vector<AffineAction> actions;
    std::map<std::vector<int>, ClassicalTarget> next;
};

struct CommRule {
    std::string writes;                            // symbol written to the cell
    std::map<std::string, std::string> on_reply;   // total over the communication alphabet
};

struct VerifierSpec {
    std::string name;
    Mode mode = Mode::TwoWay;
    std::vector<std::string> states;
    std::string initial;
    std::set<std::string> accept_states;
    std::set<std::string> reject_states;   // two-way only
    std::set<std::string> restart_states;  // two-way, round-structured protocols
    std::vector<std::string> input_alphabet;  // excludes markers
    std::vector<std::string> gamma;           // communication alphabet
    std::map<std::string, CommRule> communication;
    std::vector<RegisterDef> registers;
    std::map<std::pair<std::string, std::string>, StepRule> delta;

    // Checks every structural invariant: alphabet/state references, operator
    // column sums and dimensions, transition coverage over
    // (state x symbol x outcome), communication totality, one-way shape
    // restrictions, and static head safety at the markers.
    // Returns human-readable violations; empty means valid.
    std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// Public transcript. Everything the prover is entitled to see: state changes,
// head moves, weighting outcomes, written request symbols, and its own
// replies, in order.
// ---------------------------------------------------------------------------

struct Event {
    enum class Kind : std::uint8_t { StateChange, HeadMove, Outcome, VerifierWrote, ProverReplied };
    Kind kind;
    int a = 0;  // state id | move | register index | symbol id
    int b = 0;  // outcome index for Kind::Outcome
};

struct Transcript {
    std::vector<Event> events;

    void push(Event e) { events.push_back(e); }
    std::size_t reply_count() const;
    std::optional<int> last_reply() const;
    std::vector<int> replies() const;
    std::vector<int> outcomes() const;  // flattened weighting outcomes in order
    std::string key() const;            // canonical compact encoding
};

// ---------------------------------------------------------------------------
// Runtime form. Machine compiles a VerifierSpec into index-based tables and
// provides the exact single-step semantics. All lookups are by dense ids.
// ---------------------------------------------------------------------------

struct Config {
    enum class Status : std::uint8_t {
        Running,
        AwaitFinal,  // one-way: right marker consumed in an accepting state
        Accept,
        Reject,
        Restart,
    };
    int state = 0;
    int head = 0;
    std::vector<AffineState> regs;
    long steps = 0;
    Status status = Status::Running;

    bool halted() const {
        return status == Status::Accept || status == Status::Reject || status == Status::Restart;
    }
};

struct Branch {
    Rational probability;
    Config config;
    std::vector<Event> events;  // public events produced by this step
};
using BranchSet = std::vector<Branch>;

class Machine {
public:
    // Throws SpecError when validate() is non-empty.
    explicit Machine(VerifierSpec spec);

    const VerifierSpec& spec() const { return spec_; }
    Mode mode() const { return spec_.mode; }

    // Symbol ids are shared between tape symbols and communication symbols.
    int symbol_id(const std::string& name) const;          // throws on unknown
    std::optional<int> try_symbol_id(const std::string& name) const;
    const std::string& symbol_name(int id) const;
    int state_id(const std::string& name) const;
    const std::string& state_name(int id) const;

    std::vector<int> tape_from_word(const Word& w) const;  // [<c>, w..., <$>]
    Config initial_config() const;

    bool is_communication(int state) const { return comm_write_[state] >= 0; }
    int comm_write(int state) const { return comm_write_[state]; }
    const std::vector<int>& gamma_ids() const { return gamma_ids_; }

    // One computation step. For communication states a reply must be given
    // (MissingReplyError otherwise) and must be a communication symbol
    // (InvalidReplySymbolError otherwise); such steps exchange one symbol and
    // change only the deterministic state. Tape steps apply the affine phase,
    // branch over weighting outcomes with their exact probabilities, then
    // apply the classical phase. Probability-zero outcomes are not emitted.
    BranchSet step(const Config& cfg, const std::vector<int>& tape,
                   std::optional<int> reply = std::nullopt) const;

    // One-way only: branches over the product of per-register weightings for a
    // configuration in Status::AwaitFinal; accepting leaves are those where
    // every outcome lies in its register's accepting set.
    BranchSet final_weighting(const Config& cfg) const;

    std::size_t register_count() const { return spec_.registers.size(); }
    const AffineOperator& register_operator(std::size_t reg, const std::string& name) const;

private:
    struct CompiledRule {
        // per register: -1 = weigh, otherwise index into the register's op list
        std::vector<int> action_ops;
        bool any_weigh = false;
        std::map<std::vector<int>, std::pair<int, int>> next;  // tau -> (state, move as int)
    };

    VerifierSpec spec_;
    std::map<std::string, int> sym_ids_;
    std::vector<std::string> sym_names_;
    std::map<std::string, int> state_ids_;
    std::vector<int> comm_write_;                    // -1 when not a communication state
    std::vector<std::map<int, int>> comm_reply_;     // state -> (reply sym -> next state)
    std::vector<int> gamma_ids_;
    std::vector<std::vector<AffineOperator>> reg_ops_;      // [register][op index]
    std::vector<std::map<std::string, int>> reg_op_ids_;
    std::vector<std::vector<std::vector<CompiledRule>>> rules_;  // [state][symbol] -> rule (vector len 1) or empty
    std::vector<std::uint8_t> state_class_;          // 0 run, 1 accept, 2 reject, 3 restart

    Config::Status classify(int state, int head, int tape_len) const;
};

}  // namespace affam
