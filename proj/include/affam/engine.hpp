#pragma once

#include <map>
#include <string>
#include <vector>

#include "affam/machine.hpp"
#include "affam/prover.hpp"

namespace affam {

// ---------------------------------------------------------------------------
// Exact and sampled evaluation of prover/verifier games.
// ---------------------------------------------------------------------------

struct EngineLimits {
    long horizon = 100000;         // max engine steps along any path
    std::size_t node_cap = 4000000;  // explored-node budget (BranchExplosionError)
};

struct EvalResult {
    Rational p_accept;
    Rational p_reject;
    Rational p_restart;
    Rational p_unresolved;  // mass of paths still running at the horizon
    Rational expected_steps_lb;
    long horizon = 0;
    std::size_t nodes = 0;

    Rational total() const { return p_accept + p_reject + p_restart + p_unresolved; }
};

// Exhaustive branch enumeration up to the horizon under a fixed prover.
// Probabilities are exact; paths merge when configuration, step count and the
// prover's memo key all agree.
EvalResult evaluate_exact(const Machine& m, const Word& input, const ProverStrategy& prover,
                          const EngineLimits& limits);

enum class Objective { Accept, Reject };

// Restricts the adversary's choices at communication nodes. Protocols whose
// reply trees are too wide for the full alphabet (streaming protocols) pass a
// menu enumerating the candidate replies worth considering; the computed
// value is then the exact worst case over all provers confined to the menu.
// memo_key must determine every future menu, like ProverStrategy::memo_key.
class ReplyMenu {
public:
    virtual ~ReplyMenu() = default;
    virtual std::vector<int> options(const Machine& m, const Transcript& t,
                                     int request) const = 0;
    virtual std::string memo_key(const Transcript& t) const { return t.key(); }
};

struct WorstCaseResult {
    EvalResult result;
    // Optimal reply per reachable communication node, keyed by transcript.
    // Filled only when requested.
    std::map<std::string, std::string> strategy;
};

// Expectimax over the public-coin game tree: expectation at weighting
// branches, maximum of the objective over replies at communication branches.
// Because the prover sees the whole public transcript, a pointwise-optimal
// deterministic strategy exists and dominates every ProverStrategy, so this
// is the exact worst case over all provers. Values are memoized on
// (configuration, remaining steps); ties break toward the smallest reply id.
WorstCaseResult evaluate_worst_case(const Machine& m, const Word& input, Objective objective,
                                    const EngineLimits& limits, bool want_strategy = false,
                                    const ReplyMenu* menu = nullptr);

// Per-round summary of a round-structured protocol; the three entries sum to
// 1 when the round always finishes inside the horizon.
struct RoundSummary {
    Rational p_accept;
    Rational p_reject;
    Rational p_restart;
};

struct RoundClosure {
    Rational overall_accept;
    Rational overall_reject;
    Rational expected_rounds;
};

// Geometric-series closure of the restart chain: overall acceptance is
// a / (a + r), expected rounds 1 / (1 - restart). DivergenceError when
// a + r = 0.
RoundClosure round_fixpoint(const RoundSummary& round);

// Worst case over provers for a round-structured protocol. The overall value
// sup_P P(accept) equals max over per-round strategies of a/(a+r), computed
// by exact policy iteration on the restart game: expectimax with the restart
// leaf valued at the current candidate v, then v <- a/(a+r) for the chosen
// strategy, until v is a fixpoint. Horizon-truncated mass is pinned to 0 for
// the lower bound and to 1 for the upper bound; the two coincide whenever
// every round ends within the horizon.
struct RoundsWorstResult {
    RoundSummary round;          // final policy, lower-bound run
    Rational round_unresolved;   // per-round truncated mass of that policy
    Rational overall_accept_lb;
    Rational overall_accept_ub;
    int iterations = 0;
};

RoundsWorstResult evaluate_rounds_worst(const Machine& m, const Word& input,
                                        const EngineLimits& limits,
                                        const ReplyMenu* menu = nullptr);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct MonteCarloResult {
    long trials = 0;
    long accepted = 0;
    long rejected = 0;
    long restarted = 0;
    long unresolved = 0;
    double mean_steps = 0.0;  // over halting trials
    double var_steps = 0.0;

    double accept_frequency() const {
        return trials ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0;
    }
};

// Seeded, reproducible sampling. Each weighting outcome is drawn exactly by
// rational CDF inversion over a uniform integer below the common denominator.
MonteCarloResult monte_carlo(const Machine& m, const Word& input, const ProverStrategy& prover,
                             long trials, unsigned long seed, const EngineLimits& limits);

// One sampled path with human-readable event lines; the debugging surface for
// prover strategies.
struct TraceResult {
    std::vector<std::string> lines;
    Config::Status final_status = Config::Status::Running;
    long steps = 0;
};

TraceResult sample_trace(const Machine& m, const Word& input, const ProverStrategy& prover,
                         unsigned long seed, const EngineLimits& limits);

}  // namespace affam
