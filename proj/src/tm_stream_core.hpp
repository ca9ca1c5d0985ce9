#pragma once

// Internal: shared construction of configuration-streaming verifiers. The
// weak protocol, the continuation-check variant, the alternating-machine
// protocol and the reduction pipeline are all parameterizations of one
// streaming core:
//
//   - the prover streams configuration blocks c0 # c1 # c2 # ...;
//   - c0 is matched deterministically against the verifier's own input;
//   - while block i streams, the current register accumulates val(c_i) in
//     entry 3 (it already holds val(next(c_{i-1})) in entry 2) and the other
//     register accumulates val(next(c_i)) in entry 2, with a held-back symbol
//     buffer resolving the rewrite ordering around the state symbol;
//   - each '#' amplifies, subtracts and weighs the current register: any
//     nonzero value gap survives with probability 1/(1 + 2C|gap|);
//   - halting blocks turn the surviving mass into a verdict.
//
// Optional layers: the idle-head linear-length check, the continuation-check
// register with its head-bounce windows, public-coin/prover resolution of
// alternating branches, a restart-on-accept register, and a knapsack-game
// layer fed by the machine's captured output symbols.

#include <optional>

#include "affam/protocols.hpp"

namespace affam::detail {

struct StreamBuildOptions {
    bool length_check = false;
    std::optional<ContinuationCheck> continuation;
    bool atm = false;
    bool kg_embed = false;
    bool restart_register = false;
    Rational restart_ratio{1, 2};
    Rational restart_delta{0};
    enum class Halving { None, PerSymbol, PerPair };
    Halving halving = Halving::None;
};

VerifierSpec build_stream_verifier(const TuringMachineSpec& machine, const Rational& epsilon,
                                   const StreamBuildOptions& options);

// Operators shared with the standalone knapsack builder.
AffineOperator kg_subtract_op();                 // (1,s,t,b) -> (1,s-t,0,b+2t)
AffineOperator continuation_gate_op(const ContinuationCheck& cc);
AffineOperator continuation_update_op(const ContinuationCheck& cc);
std::size_t continuation_register_dim(const ContinuationCheck& cc);

}  // namespace affam::detail
