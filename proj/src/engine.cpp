#include "affam/engine.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "affam/errors.hpp"

namespace affam {

namespace {

std::string config_key(const Config& cfg) {
    std::ostringstream os;
    os << cfg.state << '|' << cfg.head << '|' << static_cast<int>(cfg.status) << '|' << cfg.steps;
    for (const auto& r : cfg.regs) {
        os << '#';
        for (std::size_t i = 0; i < r.dim(); ++i) os << r[i].str() << ',';
    }
    return os.str();
}

void append_events(Transcript& t, const std::vector<Event>& events) {
    for (const auto& e : events) t.push(e);
}

}  // namespace

// ---------------------------------------------------------------------------
// evaluate_exact: level-synchronous enumeration with branch merging
// ---------------------------------------------------------------------------

EvalResult evaluate_exact(const Machine& m, const Word& input, const ProverStrategy& prover,
                          const EngineLimits& limits) {
    if (limits.horizon < 0) throw Error("horizon must be nonnegative");
    const std::vector<int> tape = m.tape_from_word(input);

    struct Node {
        Config cfg;
        Transcript transcript;
        Rational prob;
    };

    std::map<std::string, Node> frontier;
    {
        Node root{m.initial_config(), {}, Rational(1)};
        frontier.emplace(config_key(root.cfg) + '!' + prover.memo_key(root.transcript),
                         std::move(root));
    }

    EvalResult res;
    res.horizon = limits.horizon;
    std::size_t nodes = 0;

    while (!frontier.empty()) {
        std::map<std::string, Node> next;
        for (auto& [key, node] : frontier) {
            (void)key;
            if (++nodes > limits.node_cap)
                throw BranchExplosionError("exact evaluation exceeded the node cap", nodes,
                                           limits.node_cap);
            const Config& cfg = node.cfg;
            switch (cfg.status) {
                case Config::Status::Accept:
                    res.p_accept += node.prob;
                    res.expected_steps_lb += node.prob * Rational(cfg.steps);
                    continue;
                case Config::Status::Reject:
                    res.p_reject += node.prob;
                    res.expected_steps_lb += node.prob * Rational(cfg.steps);
                    continue;
                case Config::Status::Restart:
                    res.p_restart += node.prob;
                    res.expected_steps_lb += node.prob * Rational(cfg.steps);
                    continue;
                default: break;
            }
            if (cfg.steps >= limits.horizon) {
                res.p_unresolved += node.prob;
                res.expected_steps_lb += node.prob * Rational(cfg.steps);
                continue;
            }
            BranchSet branches;
            if (cfg.status == Config::Status::AwaitFinal) {
                branches = m.final_weighting(cfg);
            } else if (m.is_communication(cfg.state)) {
                branches = m.step(cfg, tape, prover.reply(m, node.transcript, m.comm_write(cfg.state)));
            } else {
                branches = m.step(cfg, tape);
            }
            for (auto& b : branches) {
                Transcript t = node.transcript;
                append_events(t, b.events);
                std::string k = config_key(b.config) + '!' + prover.memo_key(t);
                auto it = next.find(k);
                if (it == next.end()) {
                    next.emplace(std::move(k),
                                 Node{std::move(b.config), std::move(t), node.prob * b.probability});
                } else {
                    it->second.prob += node.prob * b.probability;
                }
            }
        }
        frontier = std::move(next);
    }
    res.nodes = nodes;
    return res;
}

// ---------------------------------------------------------------------------
// expectimax core
// ---------------------------------------------------------------------------

namespace {

struct Tuple5 {
    Rational acc, rej, res, unres, steps;

    Tuple5& add_scaled(const Tuple5& o, const Rational& p) {
        acc += p * o.acc;
        rej += p * o.rej;
        res += p * o.res;
        unres += p * o.unres;
        steps += p * o.steps;
        return *this;
    }
};

struct LeafWeights {
    Rational w_acc{1};
    Rational w_rej{0};
    Rational w_res{0};
    Rational w_unres{0};
};

Rational score_of(const Tuple5& t, const LeafWeights& w) {
    return w.w_acc * t.acc + w.w_rej * t.rej + w.w_res * t.res + w.w_unres * t.unres;
}

class Expectimax {
public:
    Expectimax(const Machine& m, const std::vector<int>& tape, const LeafWeights& weights,
               const EngineLimits& limits, const ReplyMenu* menu = nullptr)
        : m_(m), tape_(tape), weights_(weights), limits_(limits), menu_(menu) {}

    Tuple5 value(const Config& root) {
        Transcript t;
        return go(root, t);
    }

    std::size_t nodes() const { return nodes_; }

    // Replays the optimal strategy, recording the chosen reply at every
    // communication node reachable under it.
    void extract(const Config& root, std::map<std::string, std::string>& out) {
        Transcript t;
        walk(root, t, out);
    }

private:
    Tuple5 go(const Config& cfg, Transcript& transcript) {
        std::string key = config_key(cfg);
        if (menu_) key += '!' + menu_->memo_key(transcript);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (++nodes_ > limits_.node_cap)
            throw BranchExplosionError("worst-case evaluation exceeded the node cap", nodes_,
                                       limits_.node_cap);
        Tuple5 result{};
        if (cfg.status == Config::Status::Accept) {
            result.acc = Rational(1);
            result.steps = Rational(cfg.steps);
        } else if (cfg.status == Config::Status::Reject) {
            result.rej = Rational(1);
            result.steps = Rational(cfg.steps);
        } else if (cfg.status == Config::Status::Restart) {
            result.res = Rational(1);
            result.steps = Rational(cfg.steps);
        } else if (cfg.steps >= limits_.horizon) {
            result.unres = Rational(1);
            result.steps = Rational(cfg.steps);
        } else if (cfg.status == Config::Status::AwaitFinal) {
            for (auto& b : m_.final_weighting(cfg)) {
                const std::size_t mark = transcript.events.size();
                append_events(transcript, b.events);
                result.add_scaled(go(b.config, transcript), b.probability);
                transcript.events.resize(mark);
            }
        } else if (m_.is_communication(cfg.state)) {
            bool have = false;
            Rational best_score;
            for (int reply : menu(transcript, m_.comm_write(cfg.state))) {
                BranchSet bs = m_.step(cfg, tape_, reply);
                const std::size_t mark = transcript.events.size();
                append_events(transcript, bs.front().events);
                Tuple5 t = go(bs.front().config, transcript);
                transcript.events.resize(mark);
                const Rational s = score_of(t, weights_);
                if (!have || s > best_score) {
                    have = true;
                    best_score = s;
                    result = t;
                }
            }
            if (!have) throw Error("communication state with no reply options");
        } else {
            for (auto& b : m_.step(cfg, tape_)) {
                const std::size_t mark = transcript.events.size();
                append_events(transcript, b.events);
                result.add_scaled(go(b.config, transcript), b.probability);
                transcript.events.resize(mark);
            }
        }
        memo_.emplace(key, result);
        return result;
    }

    void walk(const Config& cfg, Transcript& transcript, std::map<std::string, std::string>& out) {
        if (cfg.halted() || cfg.steps >= limits_.horizon) return;
        if (cfg.status == Config::Status::AwaitFinal) {
            for (auto& b : m_.final_weighting(cfg)) {
                const std::size_t mark = transcript.events.size();
                append_events(transcript, b.events);
                walk(b.config, transcript, out);
                transcript.events.resize(mark);
            }
            return;
        }
        if (m_.is_communication(cfg.state)) {
            bool have = false;
            Rational best_score;
            int best_reply = -1;
            for (int reply : menu(transcript, m_.comm_write(cfg.state))) {
                BranchSet bs = m_.step(cfg, tape_, reply);
                const std::size_t mark = transcript.events.size();
                append_events(transcript, bs.front().events);
                Tuple5 t = go(bs.front().config, transcript);
                transcript.events.resize(mark);
                const Rational s = score_of(t, weights_);
                if (!have || s > best_score) {
                    have = true;
                    best_score = s;
                    best_reply = reply;
                }
            }
            out[transcript.key()] = m_.symbol_name(best_reply);
            BranchSet bs = m_.step(cfg, tape_, best_reply);
            append_events(transcript, bs.front().events);
            walk(bs.front().config, transcript, out);
            return;
        }
        for (auto& b : m_.step(cfg, tape_)) {
            const std::size_t mark = transcript.events.size();
            append_events(transcript, b.events);
            walk(b.config, transcript, out);
            transcript.events.resize(mark);
        }
    }

    std::vector<int> menu(const Transcript& t, int request) const {
        return menu_ ? menu_->options(m_, t, request) : m_.gamma_ids();
    }

    const Machine& m_;
    const std::vector<int>& tape_;
    LeafWeights weights_;
    EngineLimits limits_;
    const ReplyMenu* menu_;
    std::unordered_map<std::string, Tuple5> memo_;
    std::size_t nodes_ = 0;
};

EvalResult to_eval_result(const Tuple5& t, const EngineLimits& limits, std::size_t nodes) {
    EvalResult r;
    r.p_accept = t.acc;
    r.p_reject = t.rej;
    r.p_restart = t.res;
    r.p_unresolved = t.unres;
    r.expected_steps_lb = t.steps;
    r.horizon = limits.horizon;
    r.nodes = nodes;
    return r;
}

}  // namespace

WorstCaseResult evaluate_worst_case(const Machine& m, const Word& input, Objective objective,
                                    const EngineLimits& limits, bool want_strategy,
                                    const ReplyMenu* menu) {
    if (limits.horizon < 0) throw Error("horizon must be nonnegative");
    const std::vector<int> tape = m.tape_from_word(input);
    LeafWeights w;
    if (objective == Objective::Accept) {
        w.w_acc = Rational(1);
        w.w_rej = Rational(0);
    } else {
        w.w_acc = Rational(0);
        w.w_rej = Rational(1);
    }
    Expectimax ex(m, tape, w, limits, menu);
    const Config root = m.initial_config();
    Tuple5 t = ex.value(root);
    WorstCaseResult out;
    out.result = to_eval_result(t, limits, ex.nodes());
    if (want_strategy) ex.extract(root, out.strategy);
    return out;
}

RoundClosure round_fixpoint(const RoundSummary& round) {
    const Rational halt = round.p_accept + round.p_reject;
    if (halt.is_zero())
        throw DivergenceError("round never accepts nor rejects; the restart chain diverges");
    RoundClosure c;
    c.overall_accept = round.p_accept / halt;
    c.overall_reject = round.p_reject / halt;
    c.expected_rounds = (Rational(1) - round.p_restart).reciprocal();
    return c;
}

RoundsWorstResult evaluate_rounds_worst(const Machine& m, const Word& input,
                                        const EngineLimits& limits, const ReplyMenu* menu) {
    const std::vector<int> tape = m.tape_from_word(input);
    const Config root = m.initial_config();

    // Policy iteration (Dinkelbach) on the restart game; v is the candidate
    // overall value, rising from 0 to the exact fixpoint a / (a + r + u).
    auto iterate = [&](const Rational& unres_value, Tuple5& final_tuple) {
        Rational v(0);
        int iters = 0;
        for (;; ++iters) {
            if (iters > 200) throw Error("restart-game policy iteration failed to settle");
            LeafWeights w;
            w.w_acc = Rational(1);
            w.w_rej = Rational(0);
            w.w_res = v;
            w.w_unres = unres_value;
            Expectimax ex(m, tape, w, limits, menu);
            Tuple5 t = ex.value(root);
            const Rational a = t.acc + unres_value * t.unres;
            const Rational halt_mass = Rational(1) - t.res;
            // An all-restart best response certifies that v is already the
            // fixpoint; otherwise take the chosen policy's closed-form value.
            const Rational v_next = halt_mass.is_zero() ? v : a / halt_mass;
            if (v_next == v) {
                final_tuple = t;
                return std::pair<Rational, int>(v, iters + 1);
            }
            v = v_next;
        }
    };

    RoundsWorstResult out;
    Tuple5 lb_tuple{}, ub_tuple{};
    auto [lb, it_lb] = iterate(Rational(0), lb_tuple);
    auto [ub, it_ub] = iterate(Rational(1), ub_tuple);
    out.overall_accept_lb = lb;
    out.overall_accept_ub = ub;
    out.iterations = it_lb + it_ub;
    out.round = RoundSummary{lb_tuple.acc, lb_tuple.rej, lb_tuple.res};
    out.round_unresolved = lb_tuple.unres;
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace {

// Exact sampling from a BranchSet: draw a uniform integer below the common
// denominator and invert the rational CDF.
std::size_t sample_branch(const BranchSet& branches, gmp_randclass& rng) {
    mpz_class denom = 1;
    for (const auto& b : branches)
        mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), b.probability.denominator().get_mpz_t());
    const mpz_class z = rng.get_z_range(denom);
    mpz_class cum = 0;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        cum += branches[i].probability.numerator() * (denom / branches[i].probability.denominator());
        if (z < cum) return i;
    }
    return branches.size() - 1;  // unreachable for exact distributions
}

template <typename OnStep>
Config::Status run_one_path(const Machine& m, const std::vector<int>& tape,
                            const ProverStrategy& prover, gmp_randclass& rng,
                            const EngineLimits& limits, long& steps_out, OnStep&& on_step) {
    Config cfg = m.initial_config();
    Transcript transcript;
    while (true) {
        if (cfg.halted()) {
            steps_out = cfg.steps;
            return cfg.status;
        }
        if (cfg.steps >= limits.horizon) {
            steps_out = cfg.steps;
            return Config::Status::Running;  // unresolved
        }
        BranchSet branches;
        if (cfg.status == Config::Status::AwaitFinal) {
            branches = m.final_weighting(cfg);
        } else if (m.is_communication(cfg.state)) {
            branches = m.step(cfg, tape, prover.reply(m, transcript, m.comm_write(cfg.state)));
        } else {
            branches = m.step(cfg, tape);
        }
        const std::size_t pick =
            branches.size() == 1 ? 0 : sample_branch(branches, rng);
        append_events(transcript, branches[pick].events);
        on_step(branches[pick]);
        cfg = std::move(branches[pick].config);
    }
}

}  // namespace

MonteCarloResult monte_carlo(const Machine& m, const Word& input, const ProverStrategy& prover,
                             long trials, unsigned long seed, const EngineLimits& limits) {
    if (trials < 1) throw Error("trials must be at least 1");
    const std::vector<int> tape = m.tape_from_word(input);
    gmp_randclass rng(gmp_randinit_mt);
    rng.seed(seed);

    MonteCarloResult res;
    res.trials = trials;
    double mean = 0.0, m2 = 0.0;
    long halted = 0;
    for (long i = 0; i < trials; ++i) {
        long steps = 0;
        const Config::Status s =
            run_one_path(m, tape, prover, rng, limits, steps, [](const Branch&) {});
        switch (s) {
            case Config::Status::Accept: ++res.accepted; break;
            case Config::Status::Reject: ++res.rejected; break;
            case Config::Status::Restart: ++res.restarted; break;
            default: ++res.unresolved; continue;
        }
        ++halted;
        const double d = static_cast<double>(steps) - mean;
        mean += d / static_cast<double>(halted);
        m2 += d * (static_cast<double>(steps) - mean);
    }
    res.mean_steps = halted ? mean : 0.0;
    res.var_steps = halted > 1 ? m2 / static_cast<double>(halted - 1) : 0.0;
    return res;
}

TraceResult sample_trace(const Machine& m, const Word& input, const ProverStrategy& prover,
                         unsigned long seed, const EngineLimits& limits) {
    const std::vector<int> tape = m.tape_from_word(input);
    gmp_randclass rng(gmp_randinit_mt);
    rng.seed(seed);

    TraceResult out;
    long step_no = 0;
    auto describe = [&](const Branch& b) {
        std::ostringstream os;
        os << "step " << ++step_no;
        if (b.probability != Rational(1)) os << " (p=" << b.probability.str() << ")";
        os << ":";
        for (const auto& e : b.events) {
            switch (e.kind) {
                case Event::Kind::VerifierWrote: os << " wrote " << m.symbol_name(e.a); break;
                case Event::Kind::ProverReplied: os << " reply " << m.symbol_name(e.a); break;
                case Event::Kind::Outcome:
                    os << " outcome[r" << e.a << "]=" << e.b;
                    break;
                case Event::Kind::StateChange: os << " -> " << m.state_name(e.a); break;
                case Event::Kind::HeadMove:
                    if (e.a != 0) os << " head" << (e.a > 0 ? "+1" : "-1");
                    break;
            }
        }
        out.lines.push_back(os.str());
    };
    long steps = 0;
    const Config::Status s = run_one_path(m, tape, prover, rng, limits, steps, describe);
    out.final_status = s;
    out.steps = steps;
    const char* label = s == Config::Status::Accept    ? "accept"
                        : s == Config::Status::Reject  ? "reject"
                        : s == Config::Status::Restart ? "restart"
                                                       : "unresolved at horizon";
    out.lines.push_back(std::string("final: ") + label + " after " + std::to_string(steps) +
                        " steps");
    return out;
}

}  // namespace affam
