#include <variant>

#include "affam/encoders.hpp"
#include "spec_builder.hpp"
#include "tm_stream_core.hpp"

namespace affam {

// ---------------------------------------------------------------------------
// ContinuationCheck arithmetic
// ---------------------------------------------------------------------------

Rational ContinuationCheck::rejection_probability(std::size_t n) const {
    if (kind == Kind::Exponential)
        return (m * Rational(2).pow(k * static_cast<long>(n))).reciprocal();
    // polynomial register: n-1 power updates per window (the first interior
    // symbol is skipped), gate coefficients (m/2) C(k-1, j)
    const long x = n == 0 ? 0 : static_cast<long>(n) - 1;
    const Rational grown = Rational(x + 1).pow(k - 1) - Rational(1);
    return (Rational(1) + m * grown).reciprocal();
}

Rational ContinuationCheck::closed_form(std::size_t n) const {
    if (kind == Kind::Exponential)
        return (m * Rational(2).pow(k * static_cast<long>(n))).reciprocal();
    return (m * Rational(static_cast<long>(n)).pow(k - 1)).reciprocal();
}

mpz_class ContinuationCheck::prefix_budget(std::size_t n) const {
    mpz_class p;
    if (kind == Kind::Exponential)
        mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k) * n);
    else
        mpz_ui_pow_ui(p.get_mpz_t(), n, static_cast<unsigned long>(k));
    return c * p;
}

long ContinuationCheck::checks_in_budget(std::size_t n) const {
    const mpz_class checks = prefix_budget(n) / static_cast<long>(window(n));
    return static_cast<long>(checks.get_si());
}

Rational ContinuationCheck::false_rejection(std::size_t n) const {
    const Rational p = rejection_probability(n);
    const Rational keep = (Rational(1) - p).pow(checks_in_budget(n));
    return Rational(1) - keep;
}

void ContinuationCheck::assert_budget(std::size_t n, const Rational& epsilon) const {
    if (n == 0) throw BudgetError("continuation checks are undefined for empty inputs");
    if (rejection_probability(n) == Rational(1))
        throw BudgetError("the check register degenerates: every check rejects");
    const Rational fr = false_rejection(n);
    if (fr > epsilon)
        throw BudgetError("continuation check false-rejection " + fr.str() +
                          " exceeds the error bound " + epsilon.str());
}

namespace detail {

AffineOperator kg_subtract_op() {
    return AffineOperator({{Rational(1), Rational(0), Rational(0), Rational(0)},
                           {Rational(0), Rational(1), Rational(-1), Rational(0)},
                           {Rational(0), Rational(0), Rational(0), Rational(0)},
                           {Rational(0), Rational(0), Rational(2), Rational(1)}});
}

std::size_t continuation_register_dim(const ContinuationCheck& cc) {
    return cc.kind == ContinuationCheck::Kind::Exponential ? 2
                                                           : static_cast<std::size_t>(cc.k) + 2;
}

AffineOperator continuation_update_op(const ContinuationCheck& cc) {
    if (cc.kind == ContinuationCheck::Kind::Exponential)
        return scale_first_entry(Rational(2).pow(cc.k).reciprocal());
    return PolynomialEncoderBank::power_update(static_cast<std::size_t>(cc.k) - 1);
}

AffineOperator continuation_gate_op(const ContinuationCheck& cc) {
    if (cc.kind == ContinuationCheck::Kind::Exponential)
        return scale_first_entry(cc.m.reciprocal());
    // scale power entry j by (m/2) C(k-1, j); constant, value and balancing
    // entries pass through
    const std::size_t dim = continuation_register_dim(cc);
    auto rows = std::vector<RVec>(dim, RVec(dim, Rational(0)));
    rows[0][0] = Rational(1);
    std::vector<mpz_class> binom(static_cast<std::size_t>(cc.k), 0);
    binom[0] = 1;
    for (long row = 1; row < cc.k; ++row)
        for (long j = row; j >= 1; --j)
            binom[static_cast<std::size_t>(j)] += binom[static_cast<std::size_t>(j - 1)];
    for (long j = 1; j < cc.k; ++j) {
        const Rational coeff = cc.m / Rational(2) * Rational(binom[static_cast<std::size_t>(j)]);
        rows[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = coeff;
        rows[dim - 1][static_cast<std::size_t>(j)] = Rational(1) - coeff;
    }
    rows[dim - 2][dim - 2] = Rational(1);
    rows[dim - 1][dim - 1] = Rational(1);
    return AffineOperator(std::move(rows));
}

namespace {

class StreamBuilder {
public:
    StreamBuilder(const TuringMachineSpec& machine, const Rational& epsilon,
                  const StreamBuildOptions& opt)
        : m_(machine), opt_(opt), b_(Mode::TwoWay) {
        amplify_ = (Rational(1) - epsilon) / (Rational(2) * epsilon);
    }

    VerifierSpec build();

private:
    // ---- context threaded through the block layer ----
    struct Ctx {
        int parity = 0;
        int dir = -1;     // block walk direction (length check / windows)
        int extra = 0;    // stationary symbols seen at the far marker
        int fresh = 1;    // polynomial windows: skip the next interior update
        std::string kg;   // "", "S", or "<A|B|E|F><take><seen>"

        std::string str() const {
            return std::to_string(parity) + (dir < 0 ? "L" : "R") + std::to_string(extra) +
                   std::to_string(fresh) + (kg.empty() ? "" : ":" + kg);
        }
    };

    struct Node {
        std::string phase;  // ST,U,Q,QL,V,VH,VH1
        std::string h, q;
        char verdict = 0;
        Ctx ctx;
    };

    struct ChainOp {
        std::map<std::size_t, std::string> ops;
    };
    struct ChainWeigh {
        std::size_t reg;
        std::vector<std::string> targets;  // "@CONT" resolves to the running target
    };
    struct ChainSel {
        std::string request;
        std::map<std::string, std::string> routes;  // reply -> target ("@CONT" allowed)
    };
    using ChainItem = std::variant<ChainOp, ChainWeigh, ChainSel>;

    const TuringMachineSpec& m_;
    StreamBuildOptions opt_;
    SpecBuilder b_;
    Rational amplify_;

    std::size_t rA_ = 0, rB_ = 0;
    std::size_t rCoin_ = SIZE_MAX, rCheck_ = SIZE_MAX, rRestart_ = SIZE_MAX, rKg_ = SIZE_MAX;
    std::set<std::string> tape_set_, nonhalt_, halt_;
    std::vector<std::string> all_syms_;
    std::vector<Node> worklist_;
    std::set<std::string> enqueued_;
    int chain_counter_ = 0;
    bool bounce_ = false;  // head moves during block streaming

    static std::string node_name(const Node& n) {
        std::string s = "b:" + n.phase;
        if (!n.h.empty()) s += "," + n.h;
        if (!n.q.empty()) s += "," + n.q;
        if (n.verdict) s += std::string(",") + n.verdict;
        return s + "|" + n.ctx.str();
    }

    std::string enqueue(Node n) {
        const std::string name = node_name(n);
        if (enqueued_.insert(name).second) worklist_.push_back(std::move(n));
        return name;
    }

    std::vector<AffineAction> acts(const std::map<std::size_t, std::string>& ops) const {
        std::vector<AffineAction> a(b_.spec.registers.size(), AffineAction::apply_op("I"));
        for (const auto& [r, op] : ops) a[r] = AffineAction::apply_op(op);
        return a;
    }

    void uniform_rule(const std::string& from, const std::map<std::size_t, std::string>& ops,
                      const std::string& to) {
        for (const auto& sym : all_syms_) b_.rule(from, sym, acts(ops), to, Move::Stay);
    }

    std::string fresh_state() { return "z" + std::to_string(chain_counter_++); }

    std::string compile_chain(const std::vector<ChainItem>& items, std::string target) {
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
            const std::string name = fresh_state();
            if (const auto* op = std::get_if<ChainOp>(&*it)) {
                uniform_rule(name, op->ops, target);
            } else if (const auto* wg = std::get_if<ChainWeigh>(&*it)) {
                std::vector<std::pair<std::string, Move>> outs;
                for (const auto& t : wg->targets)
                    outs.emplace_back(t == "@CONT" ? target : t, Move::Stay);
                for (const auto& sym : all_syms_) b_.weigh_rule(name, sym, wg->reg, outs);
            } else {
                const auto& sel = std::get<ChainSel>(*it);
                std::map<std::string, std::string> routes;
                for (const auto& g : b_.spec.gamma) routes[g] = "REJ";
                for (const auto& [g, t] : sel.routes) routes[g] = t == "@CONT" ? target : t;
                b_.comm(name, sel.request, routes);
            }
            target = name;
        }
        return target;
    }

    // ---- head bounce while streaming ----
    struct Bounce {
        bool reject = false;       // length violation
        Move move = Move::Stay;
        std::string check_op;      // op on the check register this step
        bool check_fires = false;  // weigh/reset the check register afterwards
        bool hash_ok = true;       // '#' is allowed here (length check)
        Ctx ctx;                   // updated context
    };

    Bounce bounce(const Ctx& ctx, const std::string& scanned, bool is_hash) const {
        Bounce out;
        out.ctx = ctx;
        if (!bounce_) return out;
        const std::string far = ctx.dir > 0 ? kRightMarker : kLeftMarker;
        if (opt_.length_check) {
            // exactly |w|+1 moving symbols plus two stationary ones per block
            if (is_hash) {
                out.hash_ok = scanned == far && ctx.extra == 2;
                return out;
            }
            if (ctx.extra == 2) {
                out.reject = true;  // block longer than |w| + 3
                return out;
            }
            if (scanned == far) {
                out.ctx.extra = ctx.extra + 1;
            } else {
                out.move = ctx.dir > 0 ? Move::Right : Move::Left;
            }
            return out;
        }
        // continuation windows: every streamed symbol walks the head; landing
        // symbols on interior cells update the check register, the far marker
        // fires the check
        if (scanned == far) {
            out.check_op = "gate";
            out.check_fires = true;
            out.ctx.dir = -ctx.dir;
            out.ctx.fresh = 1;
        } else if (scanned == kLeftMarker || scanned == kRightMarker) {
            out.move = ctx.dir > 0 ? Move::Right : Move::Left;
        } else {
            out.move = ctx.dir > 0 ? Move::Right : Move::Left;
            if (opt_.continuation->kind == ContinuationCheck::Kind::Polynomial && ctx.fresh) {
                out.ctx.fresh = 0;
            } else {
                out.check_op = "upd";
            }
        }
        return out;
    }

    // check interrupt: weigh (outcome 1 rejects), re-arm, continue
    std::vector<ChainItem> check_chain() const {
        const std::size_t dim = continuation_register_dim(*opt_.continuation);
        std::vector<std::string> targets(dim, "@CONT");
        targets[0] = "REJ";
        return {ChainWeigh{rCheck_, targets}, ChainOp{{{rCheck_, "reset"}}}};
    }

    // ---- knapsack layer ----
    struct Capture {
        bool reject = false;
        bool branching = false;                   // resolved by coin or prover bit
        std::map<std::size_t, std::string> ops;   // extra ops on the streamed step
        std::vector<ChainItem> prefix;            // chain before the resolution
        std::string kg_next;                      // plain captures
    };

    Capture capture(const Ctx& ctx, const std::string& state) const {
        Capture cap;
        cap.kg_next = ctx.kg;
        if (!opt_.kg_embed) return cap;
        auto it = m_.outputs.find(state);
        if (it == m_.outputs.end()) return cap;
        const std::string& k = it->second;
        const std::string& kst = ctx.kg;
        const char phase = kst.empty() ? ' ' : kst[0];
        const bool take = kst.size() > 1 && kst[1] == '1';
        const bool seen = kst.size() > 2 && kst[2] == '1';
        if (k == "0" || k == "1") {
            if (kst == "S") {
                cap.ops[rKg_] = "d2:" + k;
            } else if (phase == 'A' || phase == 'B' || phase == 'E' || phase == 'F') {
                if (take) cap.ops[rKg_] = "d3:" + k;
                cap.kg_next = std::string(1, phase) + (take ? "1" : "0") + "1";
            } else {
                cap.reject = true;
            }
        } else if (k == "A") {
            // a new universal pair; close the previous existential value first
            if (kst == "S" || (phase == 'F' && seen)) {
                cap.branching = true;
                if (phase == 'F') cap.prefix.push_back(ChainOp{{{rKg_, "sub"}}});
            } else {
                cap.reject = true;
            }
        } else if (k == ",") {
            if (phase == 'A' && seen)
                cap.kg_next = std::string("B") + (take ? "0" : "1") + "0";
            else if (phase == 'E' && seen)
                cap.kg_next = std::string("F") + (take ? "0" : "1") + "0";
            else
                cap.reject = true;
        } else if (k == "E") {
            if (phase == 'B' && seen) {
                cap.branching = true;
                std::map<std::size_t, std::string> ops{{rKg_, "sub"}};
                if (opt_.halving == StreamBuildOptions::Halving::PerPair)
                    ops[rRestart_] = "half";
                cap.prefix.push_back(ChainOp{std::move(ops)});
            } else {
                cap.reject = true;
            }
        } else {
            cap.reject = true;  // output outside the instance alphabet
        }
        return cap;
    }

    // Chain resolving an 'A' (coin) or 'E' (prover bit) capture; lands in
    // make_target("<phase><take>0").
    std::string capture_branch_chain(const Capture& cap, const std::string& out_symbol,
                                     const std::function<std::string(const std::string&)>& make_target) {
        std::vector<ChainItem> items = cap.prefix;
        if (out_symbol == "A") {
            items.push_back(ChainOp{{{rCoin_, "flip"}}});
            items.push_back(ChainWeigh{rCoin_, {make_target("A10"), make_target("A00")}});
        } else {
            items.push_back(ChainSel{"b?", {{"b1", make_target("E10")},
                                            {"b2", make_target("E00")}}});
        }
        return compile_chain(items, "REJ");
    }

    // verdict-accept continuation after a passed final comparison
    std::string accept_chain(const Ctx& ctx) {
        std::vector<ChainItem> items;
        if (opt_.kg_embed) {
            const std::string& kst = ctx.kg;
            const bool at_f = kst.size() == 3 && kst[0] == 'F' && kst[2] == '1';
            if (kst != "S" && !at_f) return "REJ";  // incomplete instance emitted
            if (at_f) items.push_back(ChainOp{{{rKg_, "sub"}}});
            items.push_back(ChainWeigh{rKg_, {"@CONT", "REJ", "REJ", "REJ"}});
        }
        if (opt_.restart_register) {
            items.push_back(ChainOp{{{rRestart_, "gate"}}});
            items.push_back(ChainWeigh{rRestart_, {"ACC", "RST"}});
        }
        return compile_chain(items, "ACC");
    }

    std::size_t cur_reg(const Ctx& ctx) const { return ctx.parity == 0 ? rA_ : rB_; }
    std::size_t other_reg(const Ctx& ctx) const { return ctx.parity == 0 ? rB_ : rA_; }

    std::map<std::size_t, std::string> stream_ops(const Ctx& ctx, const std::string& streamed,
                                                  const Bounce& bn) const {
        std::map<std::size_t, std::string> ops;
        if (streamed != "#") ops[cur_reg(ctx)] = "B:" + streamed;
        if (opt_.halving == StreamBuildOptions::Halving::PerSymbol) ops[rRestart_] = "half";
        if (!bn.check_op.empty()) ops[rCheck_] = bn.check_op;
        return ops;
    }

    // successor-symbol emission order around the state symbol
    std::vector<std::string> trio(const std::string& u_last, const TMTransition& t) const {
        if (u_last.empty()) {  // head on the leftmost cell
            if (t.move == 0) return {t.next, t.write};
            return {t.write, t.next};
        }
        if (t.move == 1) return {u_last, t.write, t.next};
        if (t.move == 0) return {u_last, t.next, t.write};
        return {t.next, u_last, t.write};
    }

    std::string trio_chain(const Ctx& after, const std::string& u_last, const TMTransition& t) {
        std::vector<ChainItem> items;
        for (const auto& sym : trio(u_last, t))
            items.push_back(ChainOp{{{other_reg(after), "A:" + sym}}});
        return compile_chain(items, enqueue(Node{"V", "", "", 0, after}));
    }

    // resolution of a (possibly branching) machine transition at v1
    std::string successor_chain(const Ctx& after, const std::string& u_last, const std::string& q,
                                const std::string& v1) {
        const auto& branches = m_.transitions.at({q, v1});
        if (branches.size() == 1 || !opt_.atm || !m_.labels.count(q))
            return trio_chain(after, u_last, branches[0]);
        const std::string t1 = trio_chain(after, u_last, branches[0]);
        const std::string t2 = trio_chain(after, u_last, branches[1]);
        if (m_.labels.at(q) == Quantifier::Universal)
            return compile_chain(
                {ChainOp{{{rCoin_, "flip"}}}, ChainWeigh{rCoin_, {t1, t2}}}, "REJ");
        return compile_chain({ChainSel{"b?", {{"b1", t1}, {"b2", t2}}}}, "REJ");
    }

    // the '#' comparison; verdict is 0 for a running block
    std::string hash_chain(const Ctx& ctx, const Bounce& bn, char verdict) {
        std::vector<ChainItem> items;
        items.push_back(ChainOp{{{cur_reg(ctx), "diff"}}});
        items.push_back(ChainWeigh{cur_reg(ctx), {"@CONT", "REJ", "REJ", "REJ"}});
        if (bn.check_fires)
            for (auto& it : check_chain()) items.push_back(std::move(it));
        std::string target;
        if (verdict == 'R') {
            target = "REJ";
        } else if (verdict == 'A') {
            target = accept_chain(ctx);
        } else {
            Ctx next = bn.ctx;
            next.parity = 1 - ctx.parity;
            next.extra = 0;
            next.fresh = 1;
            if (opt_.length_check) next.dir = -ctx.dir;
            target = enqueue(Node{"ST", "", "", 0, next});
        }
        return compile_chain(items, target);
    }

    void build_got_state(const std::string& got, const Node& n, const std::string& reply);
    void build_node(const Node& n);
    void build_c0();

    std::string got_name(const Node& n, const std::string& reply) const {
        return "g!" + node_name(n) + "!" + reply;
    }
};

VerifierSpec StreamBuilder::build() {
    tape_set_ = std::set<std::string>(m_.tape_alphabet.begin(), m_.tape_alphabet.end());
    for (const auto& q : m_.states) {
        if (q == m_.accept || q == m_.reject)
            halt_.insert(q);
        else
            nonhalt_.insert(q);
    }

    b_.spec.name = "tm-stream";
    b_.spec.input_alphabet = m_.input_alphabet;
    all_syms_ = m_.input_alphabet;
    all_syms_.push_back(kLeftMarker);
    all_syms_.push_back(kRightMarker);

    b_.spec.gamma = m_.tape_alphabet;
    b_.spec.gamma.insert(b_.spec.gamma.end(), m_.states.begin(), m_.states.end());
    b_.spec.gamma.push_back("#");
    b_.spec.gamma.push_back("?");
    if (opt_.atm || opt_.kg_embed) {
        b_.spec.gamma.push_back("b1");
        b_.spec.gamma.push_back("b2");
        b_.spec.gamma.push_back("b?");
    }

    bounce_ = opt_.length_check || opt_.continuation.has_value();

    rA_ = b_.add_register("cfg0", 4);
    rB_ = b_.add_register("cfg1", 4);
    std::vector<std::string> enc = m_.tape_alphabet;
    enc.insert(enc.end(), m_.states.begin(), m_.states.end());
    const long base = static_cast<long>(enc.size()) + 1;  // '#' caps the digit alphabet
    for (const std::size_t r : {rA_, rB_}) {
        b_.add_op(r, "I", AffineOperator::identity(4));
        for (std::size_t d = 0; d < enc.size(); ++d) {
            b_.add_op(r, "A:" + enc[d], digit_append(base, static_cast<long>(d), 2, 4));
            b_.add_op(r, "B:" + enc[d], digit_append(base, static_cast<long>(d), 3, 4));
        }
        b_.add_op(r, "amp",
                  AffineOperator({{Rational(1), Rational(0), Rational(0), Rational(0)},
                                  {Rational(0), amplify_, Rational(0), Rational(0)},
                                  {Rational(0), Rational(0), amplify_, Rational(0)},
                                  {Rational(0), Rational(1) - amplify_, Rational(1) - amplify_,
                                   Rational(1)}}));
        b_.add_op(r, "diff",
                  AffineOperator({{Rational(1), Rational(0), Rational(0), Rational(0)},
                                  {Rational(0), Rational(1), Rational(-1), Rational(0)},
                                  {Rational(0), Rational(-1), Rational(1), Rational(0)},
                                  {Rational(0), Rational(1), Rational(1), Rational(1)}}));
    }
    if (opt_.atm || opt_.kg_embed) {
        rCoin_ = b_.add_register("coin", 2);
        b_.add_op(rCoin_, "I", AffineOperator::identity(2));
        b_.add_op(rCoin_, "flip",
                  AffineOperator({{Rational(1, 2), Rational(1, 2)},
                                  {Rational(1, 2), Rational(1, 2)}}));
    }
    if (opt_.continuation) {
        const std::size_t dim = continuation_register_dim(*opt_.continuation);
        rCheck_ = b_.add_register("check", dim);
        b_.add_op(rCheck_, "I", AffineOperator::identity(dim));
        b_.add_op(rCheck_, "upd", continuation_update_op(*opt_.continuation));
        b_.add_op(rCheck_, "gate", continuation_gate_op(*opt_.continuation));
        b_.add_op(rCheck_, "reset", reset_to_first(dim));
    }
    if (opt_.restart_register) {
        rRestart_ = b_.add_register("restart", 2);
        b_.add_op(rRestart_, "I", AffineOperator::identity(2));
        b_.add_op(rRestart_, "half", scale_first_entry(opt_.restart_ratio));
        b_.add_op(rRestart_, "gate", scale_first_entry(opt_.restart_delta));
    }
    if (opt_.kg_embed) {
        rKg_ = b_.add_register("kgwork", 4);
        b_.add_op(rKg_, "I", AffineOperator::identity(4));
        for (const std::string d : {"0", "1"}) {
            b_.add_op(rKg_, "d2:" + d, digit_append(2, d == "1" ? 1 : 0, 2, 4));
            b_.add_op(rKg_, "d3:" + d, digit_append(2, d == "1" ? 1 : 0, 3, 4));
        }
        b_.add_op(rKg_, "sub", kg_subtract_op());
    }

    b_.spec.initial = "init";
    b_.state("init");
    b_.spec.accept_states = {"ACC"};
    b_.state("ACC");
    b_.spec.reject_states = {"REJ"};
    b_.state("REJ");
    if (opt_.restart_register) {
        b_.spec.restart_states = {"RST"};
        b_.state("RST");
    }

    build_c0();

    while (!worklist_.empty()) {
        const Node n = worklist_.back();
        worklist_.pop_back();
        build_node(n);
    }

    b_.totalize("REJ");
    return b_.spec;
}

// c0 must be exactly q0 cent w dollar, matched against the verifier's own
// tape while next(c0) is folded into the block-1 register.
void StreamBuilder::build_c0() {
    const bool q0_halts = halt_.count(m_.initial) > 0;

    Ctx ctx0;
    ctx0.parity = 0;
    ctx0.dir = -1;  // the head rests at the right marker when block 1 starts
    if (opt_.kg_embed) ctx0.kg = "S";

    auto after_c0 = [&](Ctx ctx) -> std::string {
        if (q0_halts) return m_.initial == m_.accept ? accept_chain(ctx) : "REJ";
        return enqueue(Node{"ST", "", "", 0, ctx});
    };

    auto plain_ops = [&]() {
        std::map<std::size_t, std::string> ops;
        if (opt_.halving == StreamBuildOptions::Halving::PerSymbol) ops[rRestart_] = "half";
        return ops;
    };
    auto emit_ops = [&](const std::string& sym) {
        auto ops = plain_ops();
        if (!q0_halts) ops[rA_] = "A:" + sym;
        return ops;
    };

    const Capture cap = capture(ctx0, m_.initial);
    std::vector<std::string> kg_after;
    if (cap.branching)
        kg_after = {"A10", "A00", "E10", "E00"};  // whichever the resolution lands on
    else
        kg_after = {cap.kg_next};

    std::map<std::string, std::string> cent_by_kg;
    auto body_states = [&](const std::string& kg) {
        Ctx ctx = ctx0;
        ctx.kg = kg;
        const std::string tag = kg.empty() ? std::string() : "|" + kg;
        const std::string cent_ask = "c0cent" + tag;
        const std::string body_ask = "c0body" + tag;
        const std::string hash_ask = "c0hash" + tag;

        // the machine's left boundary, then the emitted q1 (branching starts
        // resolve through the coin or the prover before the emission)
        {
            const std::string got = "g!" + cent_ask;
            b_.state(got);
            std::string target = body_ask;
            if (!q0_halts) {
                const auto& branches = m_.transitions.at({m_.initial, m_.left_end});
                auto emit_q1 = [&](const TMTransition& t) {
                    return compile_chain({ChainOp{{{rA_, "A:" + t.next}}}}, body_ask);
                };
                if (branches.size() == 1 || !opt_.atm || !m_.labels.count(m_.initial)) {
                    target = emit_q1(branches[0]);
                } else if (m_.labels.at(m_.initial) == Quantifier::Universal) {
                    target = compile_chain({ChainOp{{{rCoin_, "flip"}}},
                                            ChainWeigh{rCoin_, {emit_q1(branches[0]),
                                                                emit_q1(branches[1])}}},
                                           "REJ");
                } else {
                    target = compile_chain({ChainSel{"b?", {{"b1", emit_q1(branches[0])},
                                                            {"b2", emit_q1(branches[1])}}}},
                                           "REJ");
                }
            }
            // the boundary itself was already appended at the q0 step
            for (const auto& sym : all_syms_)
                b_.rule(got, sym, acts(plain_ops()),
                        sym == kLeftMarker ? target : std::string("REJ"),
                        sym == kLeftMarker ? Move::Right : Move::Stay);
            std::map<std::string, std::string> routes;
            for (const auto& g : b_.spec.gamma) routes[g] = "REJ";
            routes[m_.left_end] = got;
            b_.comm(cent_ask, "?", routes);
        }

        // body: the prover's symbols must match the scanned input cells
        {
            std::map<std::string, std::string> routes;
            for (const auto& g : b_.spec.gamma) routes[g] = "REJ";
            for (const auto& in : m_.input_alphabet) {
                const std::string got = "g!" + body_ask + "!" + in;
                b_.state(got);
                for (const auto& sym : all_syms_)
                    b_.rule(got, sym, acts(sym == in ? emit_ops(in) : plain_ops()),
                            sym == in ? body_ask : std::string("REJ"),
                            sym == in ? Move::Right : Move::Stay);
                routes[in] = got;
            }
            const std::string got = "g!" + body_ask + "!end";
            b_.state(got);
            for (const auto& sym : all_syms_)
                b_.rule(got, sym,
                        acts(sym == kRightMarker ? emit_ops(m_.right_end) : plain_ops()),
                        sym == kRightMarker ? hash_ask : std::string("REJ"), Move::Stay);
            routes[m_.right_end] = got;
            b_.comm(body_ask, "?", routes);
        }

        // the first separator; no comparison yet
        {
            const std::string got = "g!" + hash_ask;
            b_.state(got);
            const std::string target = after_c0(ctx);
            for (const auto& sym : all_syms_) b_.rule(got, sym, acts(plain_ops()), target, Move::Stay);
            std::map<std::string, std::string> routes;
            for (const auto& g : b_.spec.gamma) routes[g] = "REJ";
            routes["#"] = got;
            b_.comm(hash_ask, "?", routes);
        }
        return cent_ask;
    };
    for (const auto& kg : kg_after)
        if (!cent_by_kg.count(kg)) cent_by_kg[kg] = body_states(kg);

    // q0, with its output capture
    {
        const std::string got = "g!c0q";
        b_.state(got);
        std::map<std::size_t, std::string> ops = emit_ops(m_.left_end);
        std::string target;
        if (cap.reject) {
            target = "REJ";
        } else if (cap.branching) {
            target = capture_branch_chain(cap, m_.outputs.at(m_.initial),
                                          [&](const std::string& kg) {
                                              return cent_by_kg.at(kg);
                                          });
        } else {
            for (const auto& [r, op] : cap.ops) ops[r] = op;
            target = cent_by_kg.at(cap.kg_next);
        }
        for (const auto& sym : all_syms_) b_.rule(got, sym, acts(ops), target, Move::Stay);
        std::map<std::string, std::string> routes;
        for (const auto& g : b_.spec.gamma) routes[g] = "REJ";
        routes[m_.initial] = got;
        b_.comm("c0q", "?", routes);
    }

    b_.rule("init", kLeftMarker, b_.ids(), "c0q", Move::Stay);
}

void StreamBuilder::build_node(const Node& n) {
    const std::string ask = node_name(n);
    std::map<std::string, std::string> routes;
    for (const auto& g : b_.spec.gamma) routes[g] = "REJ";

    auto add_got = [&](const std::string& reply) {
        const std::string got = got_name(n, reply);
        routes[reply] = got;
        build_got_state(got, n, reply);
    };

    if (n.phase == "ST") {
        add_got(m_.left_end);  // configurations start with the boundary or a state
        for (const auto& q : nonhalt_) add_got(q);
        for (const auto& q : halt_) add_got(q);
    } else if (n.phase == "U") {
        for (const auto& s : m_.tape_alphabet) add_got(s);
        for (const auto& q : nonhalt_) add_got(q);
        for (const auto& q : halt_) add_got(q);
    } else if (n.phase == "Q" || n.phase == "QL") {
        for (const auto& s : m_.tape_alphabet) add_got(s);
    } else if (n.phase == "V" || n.phase == "VH") {
        for (const auto& s : m_.tape_alphabet) add_got(s);
        add_got("#");
    } else {  // VH1
        for (const auto& s : m_.tape_alphabet) add_got(s);
    }
    b_.comm(ask, "?", routes);
}

void StreamBuilder::build_got_state(const std::string& got, const Node& n,
                                    const std::string& reply) {
    b_.state(got);
    const Ctx& ctx = n.ctx;
    const bool is_hash = reply == "#";
    const bool is_state_sym = nonhalt_.count(reply) > 0 || halt_.count(reply) > 0;

    for (const auto& scanned : all_syms_) {
        const Bounce bn = bounce(ctx, scanned, is_hash);
        if (bn.reject || (is_hash && !bn.hash_ok)) {
            b_.rule(got, scanned, b_.ids(), "REJ", Move::Stay);
            continue;
        }
        std::map<std::size_t, std::string> ops = stream_ops(ctx, reply, bn);
        std::string next;
        const Move move = bn.move;
        const Ctx after = bn.ctx;

        if (is_hash) {
            ops[cur_reg(ctx)] = "amp";
            next = hash_chain(ctx, bn, n.phase == "VH" ? n.verdict : 0);
        } else if (n.phase == "ST" || n.phase == "U") {
            if (is_state_sym) {
                const bool halting = halt_.count(reply) > 0;
                const Capture cap = capture(ctx, reply);
                if (cap.reject) {
                    b_.rule(got, scanned, b_.ids(), "REJ", Move::Stay);
                    continue;
                }
                auto make_target = [&](const std::string& kg) {
                    Ctx c2 = after;
                    c2.kg = kg;
                    if (halting)
                        return enqueue(
                            Node{"VH1", "", "", reply == m_.accept ? 'A' : 'R', c2});
                    if (n.phase == "ST") return enqueue(Node{"QL", "", reply, 0, c2});
                    return enqueue(Node{"Q", n.h, reply, 0, c2});
                };
                if (cap.branching) {
                    next = capture_branch_chain(cap, m_.outputs.at(reply), make_target);
                } else {
                    for (const auto& [r, op] : cap.ops) ops[r] = op;
                    next = make_target(cap.kg_next);
                }
            } else if (n.phase == "ST") {
                next = enqueue(Node{"U", reply, "", 0, after});
            } else {
                // flush the held symbol into the successor register
                ops[other_reg(ctx)] = "A:" + n.h;
                next = enqueue(Node{"U", reply, "", 0, after});
            }
        } else if (n.phase == "Q" || n.phase == "QL") {
            next = successor_chain(after, n.phase == "QL" ? std::string() : n.h, n.q, reply);
        } else if (n.phase == "V") {
            ops[other_reg(ctx)] = "A:" + reply;
            next = enqueue(Node{"V", "", "", 0, after});
        } else {  // VH1 / VH tails
            next = enqueue(Node{"VH", "", "", n.verdict, after});
        }
        // a window boundary mid-block: weigh and re-arm the check register
        // before carrying on ('#' boundaries handle this inside hash_chain)
        if (!is_hash && bn.check_fires) next = compile_chain(check_chain(), next);
        b_.rule(got, scanned, acts(ops), next, move);
    }
}

}  // namespace

VerifierSpec build_stream_verifier(const TuringMachineSpec& machine, const Rational& epsilon,
                                   const StreamBuildOptions& options) {
    StreamBuilder sb(machine, epsilon, options);
    return sb.build();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// bundles
// ---------------------------------------------------------------------------

std::unique_ptr<ProverStrategy> make_stream_prover(const std::vector<std::string>& script,
                                                   const std::string& filler) {
    return std::make_unique<FunctionProver>(
        [script, filler](const Machine& m, const Transcript& t, int) {
            const std::size_t i = t.reply_count();
            return m.symbol_id(i < script.size() ? script[i] : filler);
        },
        [script](const Transcript& t) {
            return std::to_string(std::min(t.reply_count(), script.size()));
        });
}

std::vector<std::string> honest_stream_script(const TuringMachineSpec& machine, const Word& w,
                                              std::size_t max_steps) {
    TuringMachine tm(machine);
    const auto stream = tm.honest_stream(w, max_steps);
    std::vector<std::string> script;
    for (const auto& c : stream.configs) {
        script.insert(script.end(), c.begin(), c.end());
        script.push_back("#");
    }
    return script;
}

ProtocolBundle build_weak_tm(const TuringMachineSpec& machine, const Rational& epsilon,
                             const TmStreamOptions& options) {
    // the boundary value 1/2 is admitted for continuation-check experiments
    detail::require_epsilon(epsilon, options.continuation.has_value());
    if (machine.flavor != TMFlavor::Deterministic)
        throw FlavorError("the streaming protocol runs deterministic machines; see build_atm");
    const TuringMachineSpec finalized = finalize_machine(machine);

    detail::StreamBuildOptions opt;
    opt.length_check = options.enforce_linear_length;
    opt.continuation = options.continuation;

    ProtocolBundle bundle;
    bundle.name = options.continuation
                      ? "tm-stream+continuation"
                      : (opt.length_check ? "tm-stream+length" : "tm-stream-weak");
    bundle.verifier = detail::build_stream_verifier(finalized, epsilon, opt);
    bundle.epsilon = epsilon;
    bundle.machine = finalized;
    bundle.continuation = options.continuation;
    bundle.notes["amplify"] = ((Rational(1) - epsilon) / (Rational(2) * epsilon)).str();

    bundle.membership = [finalized](const Word& w) {
        return TuringMachine(finalized).dtm_accepts(w, 100000);
    };
    bundle.honest_prover = [finalized](const Word& w) -> std::unique_ptr<ProverStrategy> {
        return make_stream_prover(honest_stream_script(finalized, w, 100000), "#");
    };
    return bundle;
}

ProtocolBundle with_continuation_check(const ProtocolBundle& weak_bundle,
                                       ContinuationCheck::Kind kind, long k, long c,
                                       const Rational& epsilon) {
    detail::require_epsilon(epsilon, true);
    if (!weak_bundle.machine)
        throw SpecError("continuation checks attach to machine-streaming bundles");
    if (weak_bundle.continuation) throw SpecError("continuation check already armed");
    if (!weak_bundle.verifier.restart_states.empty())
        throw SpecError("continuation checks attach to plain weak bundles");
    if (k < 1 || c < 1) throw BudgetError("growth parameters must be positive");

    ContinuationCheck cc;
    cc.kind = kind;
    cc.k = k;
    cc.c = c;
    cc.m = Rational(c) / epsilon;

    TmStreamOptions opt;
    opt.continuation = cc;
    ProtocolBundle out = build_weak_tm(*weak_bundle.machine, epsilon, opt);
    out.notes["m"] = cc.m.str();
    return out;
}

}  // namespace affam
