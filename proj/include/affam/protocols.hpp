#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "affam/engine.hpp"
#include "affam/knapsack.hpp"
#include "affam/machine.hpp"
#include "affam/prover.hpp"
#include "affam/tm.hpp"

namespace affam {

// ---------------------------------------------------------------------------
// Protocol bundles: a complete verifier, its honest prover, a desk-scale
// membership oracle, and the declared error bound.
// ---------------------------------------------------------------------------

// Periodic affine experiment that halts overlong prover transmissions.
// Checks fire once per window of input_len + 1 streamed symbols (the head
// bounces across the input to count them: input_len interior cells plus the
// marker landing that triggers the check).
struct ContinuationCheck {
    enum class Kind { Exponential, Polynomial };
    Kind kind = Kind::Exponential;
    long k = 1;
    long c = 1;
    Rational m;  // c / epsilon

    std::size_t window(std::size_t input_len) const { return input_len + 1; }

    // Exact per-check rejection probability realized by the register.
    Rational rejection_probability(std::size_t input_len) const;

    // The closed form 1/(m 2^{k n}) resp. 1/(m n^{k-1}). Exponential matches
    // the construction exactly; the polynomial register realizes
    // 1/(1 + m (n^{k-1} - 1)) instead, and both numbers are surfaced.
    Rational closed_form(std::size_t input_len) const;

    mpz_class prefix_budget(std::size_t input_len) const;  // c 2^{k n} | c n^k symbols
    long checks_in_budget(std::size_t input_len) const;

    // Exact honest false-rejection mass 1 - (1-p)^checks for the budget.
    Rational false_rejection(std::size_t input_len) const;

    // BudgetError when the false-rejection mass exceeds epsilon.
    void assert_budget(std::size_t input_len, const Rational& epsilon) const;
};

struct ProtocolBundle {
    std::string name;
    VerifierSpec verifier;
    Rational epsilon;
    bool round_structured = false;
    bool perfect_completeness = true;

    std::function<std::unique_ptr<ProverStrategy>(const Word&)> honest_prover;
    std::function<bool(const Word&)> membership;

    // Constrained adversary for protocols whose full reply tree is
    // intractable; null when the plain worst case is the right tool.
    std::function<std::unique_ptr<ReplyMenu>(const Word&)> adversary_menu;

    std::optional<TuringMachineSpec> machine;       // streaming protocols
    std::optional<ContinuationCheck> continuation;  // when the check is armed

    std::map<std::string, std::string> notes;
};

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

// The two displayed middle-symbol languages leave the middle symbol's status
// ambiguous; both readings are supported. MarkedSymbol (default) fixes a
// distinguished symbol that must sit at the exact middle; AnySymbol treats
// every symbol as a valid middle, which collapses the language to odd-length
// (resp. odd-length mirrored) words.
enum class MiddleSemantics { MarkedSymbol, AnySymbol };

// One-way verifier for { x m y : |x| = |y| } over {0,1} with marked middle
// symbol m. Single 3-state register; a claimed middle at position j on a
// non-member leaves residual magnitude |2j - n - 1|, giving worst-case
// acceptance 1/(1 + 2|2j-n-1| delta) with delta = (1-eps)/(2 eps).
ProtocolBundle build_middle(const Rational& epsilon, const std::string& marked_symbol = "1",
                            MiddleSemantics semantics = MiddleSemantics::MarkedSymbol);

// One-way verifier for { x m x^R } over `alphabet` with marker m outside it.
// Register dimension |alphabet| + 2; phase one multiplies by per-symbol
// primes, phase two by their inverses; delta = 2(1-eps)/eps.
ProtocolBundle build_mpal(const std::vector<std::string>& alphabet, const Rational& epsilon,
                          const std::string& marker = "$",
                          MiddleSemantics semantics = MiddleSemantics::MarkedSymbol);

struct TmStreamOptions {
    // Reuse the idle input head to force every streamed configuration to
    // have exactly |w| + 3 symbols. Off for the plain weak protocol.
    bool enforce_linear_length = false;
    std::optional<ContinuationCheck> continuation;
};

// Two-way verifier that streams the machine's configuration history
// c0 # c1 # ... and checks c_{i+1} = next(c_i) by exact value comparison on
// two 4-state registers (amplify by C = (1-eps)/(2 eps), subtract, weigh).
// Without options this is the weak protocol: a prover that withholds '#'
// makes the run non-halting, which shows up as unresolved mass.
ProtocolBundle build_weak_tm(const TuringMachineSpec& machine, const Rational& epsilon,
                             const TmStreamOptions& options = {});

// Arms the probabilistic continuation check on a weak bundle (the bundle
// must carry its machine). kind/k/c follow the s(n) t(n) growth declaration.
ProtocolBundle with_continuation_check(const ProtocolBundle& weak_bundle,
                                       ContinuationCheck::Kind kind, long k, long c,
                                       const Rational& epsilon);

// Alternating machines: universal branches are drawn from a public coin,
// existential branches are chosen by the prover, the successor check runs as
// in the weak protocol (with the linear-length check), and a two-state
// restart-on-accept register turns per-round acceptance into a geometric
// retry. restart_ratio and gate_delta default to 1/2 and epsilon.
struct AtmOptions {
    Rational restart_ratio{1, 2};
    std::optional<Rational> gate_delta;  // default: epsilon
};
ProtocolBundle build_atm(const TuringMachineSpec& machine, const Rational& epsilon,
                         const AtmOptions& options = {});

// Knapsack-game verifier: 4-state working register accumulates
// R = S - sum(x_i + y_i) via digit encoders and the subtraction operator;
// universal choices are public coin flips, existential choices one prover
// bit per pair; the round ends by weighing the working register and gating
// the restart register with delta = (2/3) epsilon.
ProtocolBundle build_kg(const Rational& epsilon);

// Reduction pipeline: streams a linear-space reduction machine's history
// (checked as in the weak protocol plus the length check) while feeding the
// machine's emitted output symbols to an embedded knapsack-game verifier.
ProtocolBundle build_reduction(const TuringMachineSpec& reduction_machine,
                               const Rational& epsilon);

// Streaming-prover helpers shared by the machine protocols and their tests:
// a prover that plays a fixed symbol script (then a filler forever), and the
// honest script c0 # c1 # ... for a deterministic machine.
std::unique_ptr<ProverStrategy> make_stream_prover(const std::vector<std::string>& script,
                                                   const std::string& filler);
std::vector<std::string> honest_stream_script(const TuringMachineSpec& machine, const Word& w,
                                              std::size_t max_steps);

// ---------------------------------------------------------------------------
// registry (CLI surface)
// ---------------------------------------------------------------------------

struct ProtocolParams {
    Rational epsilon{1, 3};
    std::string marked_symbol = "1";
    std::string marker = "$";
    std::vector<std::string> alphabet = {"a", "b"};
    MiddleSemantics semantics = MiddleSemantics::MarkedSymbol;
    std::string machine_name;                     // sample catalog key
    std::optional<TuringMachineSpec> machine;     // overrides machine_name
    bool enforce_linear_length = false;
    std::optional<std::string> continuation_kind;  // "exponential" | "polynomial"
    long continuation_k = 1;
    long continuation_c = 1;
};

std::vector<std::string> protocol_names();
ProtocolBundle build_protocol(const std::string& name, const ProtocolParams& params);

}  // namespace affam
