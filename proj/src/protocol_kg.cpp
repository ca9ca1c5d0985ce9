#include "affam/encoders.hpp"
#include "spec_builder.hpp"
#include "tm_stream_core.hpp"

namespace affam {

namespace {

// Honest existential play: pick y_i in {e_i, f_i} keeping the residual game
// winnable, given the public x-choices so far.
class HonestKgProver : public ProverStrategy {
public:
    HonestKgProver(Word input, int coin_reg) : coin_reg_(coin_reg) {
        try {
            instance_ = KnapsackInstance::parse_word(input);
            ok_ = true;
        } catch (const MalformedInstanceError&) {
            ok_ = false;  // the verifier rejects such words on its own
        }
    }

    int reply(const Machine& m, const Transcript& t, int) const override {
        if (!ok_) return m.symbol_id("b1");
        const int b1 = m.symbol_id("b1");
        std::vector<int> xs;        // coin outcomes, 1 = first block of the pair
        std::vector<bool> picks;    // own earlier selector bits, from the transcript
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::Outcome && e.a == coin_reg_) xs.push_back(e.b);
            if (e.kind == Event::Kind::ProverReplied) picks.push_back(e.a == b1);
        }
        const std::size_t i = picks.size();  // pair being answered
        if (i >= instance_.pairs.size() || i >= xs.size()) return b1;
        mpz_class residual = instance_.target;
        for (std::size_t j = 0; j < i; ++j) {
            residual -= xs[j] == 1 ? instance_.pairs[j].a : instance_.pairs[j].b;
            residual -= picks[j] ? instance_.pairs[j].e : instance_.pairs[j].f;
        }
        const auto& p = instance_.pairs[i];
        residual -= xs[i] == 1 ? p.a : p.b;
        const bool take_e = instance_.exists_wins(residual - p.e, i + 1);
        return m.symbol_id(take_e ? "b1" : "b2");
    }

    std::string memo_key(const Transcript& t) const override {
        std::string k;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::Outcome && e.a == coin_reg_) k += "x" + std::to_string(e.b);
            if (e.kind == Event::Kind::ProverReplied) k += "y" + std::to_string(e.a);
        }
        return k;
    }

private:
    KnapsackInstance instance_;
    bool ok_ = false;
    int coin_reg_;
};

}  // namespace

ProtocolBundle build_kg(const Rational& epsilon) {
    detail::require_epsilon(epsilon);
    const Rational delta = Rational(2, 3) * epsilon;

    detail::SpecBuilder b(Mode::TwoWay);
    b.spec.name = "knapsack-game";
    b.spec.input_alphabet = {"0", "1", "A", "E", ","};
    b.spec.gamma = {"b1", "b2", "b?"};

    const std::size_t work = b.add_register("kgwork", 4);
    b.add_op(work, "I", AffineOperator::identity(4));
    for (const std::string d : {"0", "1"}) {
        b.add_op(work, "d2:" + d, digit_append(2, d == "1" ? 1 : 0, 2, 4));
        b.add_op(work, "d3:" + d, digit_append(2, d == "1" ? 1 : 0, 3, 4));
    }
    b.add_op(work, "sub", detail::kg_subtract_op());
    const std::size_t coin = b.add_register("coin", 2);
    b.add_op(coin, "I", AffineOperator::identity(2));
    b.add_op(coin, "flip",
             AffineOperator({{Rational(1, 2), Rational(1, 2)}, {Rational(1, 2), Rational(1, 2)}}));
    const std::size_t restart = b.add_register("restart", 2);
    b.add_op(restart, "I", AffineOperator::identity(2));
    b.add_op(restart, "half", scale_first_entry(Rational(1, 2)));
    b.add_op(restart, "gate", scale_first_entry(delta));

    b.spec.initial = "init";
    b.spec.accept_states = {"ACC"};
    b.spec.reject_states = {"REJ"};
    b.spec.restart_states = {"RST"};
    for (const auto& s : {"init", "ACC", "REJ", "RST"}) b.state(s);

    auto one = [&](std::size_t reg, const std::string& op) {
        auto a = b.ids();
        a[reg] = AffineAction::apply_op(op);
        return a;
    };
    auto two = [&](std::size_t r1, const std::string& o1, std::size_t r2, const std::string& o2) {
        auto a = b.ids();
        a[r1] = AffineAction::apply_op(o1);
        a[r2] = AffineAction::apply_op(o2);
        return a;
    };
    const std::vector<std::string> digits = {"0", "1"};
    auto all_syms = [&]() {
        std::vector<std::string> s = b.spec.input_alphabet;
        s.push_back(kLeftMarker);
        s.push_back(kRightMarker);
        return s;
    }();

    b.rule("init", kLeftMarker, b.ids(), "rdS1", Move::Right);

    // target value: at least one digit into entry 2
    for (const auto& d : digits) {
        b.rule("rdS1", d, one(work, "d2:" + d), "rdS", Move::Right);
        b.rule("rdS", d, one(work, "d2:" + d), "rdS", Move::Right);
    }
    b.rule("rdS", "A", one(coin, "flip"), "coinw", Move::Stay);
    b.rule("rdS", kRightMarker, b.ids(), "wkw", Move::Stay);  // no pairs

    // the public universal choice: outcome 1 takes the first block (the head
    // rests on 'A' here; other scan positions fall through to rejection)
    b.weigh_rule("coinw", "A", coin, {{"rdA1t", Move::Right}, {"rdA1s", Move::Right}});

    // pair blocks: "t" encodes the scanned digits into entry 3, "s" skips
    auto digit_run = [&](const std::string& first, const std::string& loop, bool take,
                         const std::string& stop_sym, const std::string& stop_state,
                         std::vector<AffineAction> stop_acts, Move stop_move) {
        for (const auto& d : digits) {
            const auto acts = take ? one(work, "d3:" + d) : b.ids();
            b.rule(first, d, acts, loop, Move::Right);
            b.rule(loop, d, acts, loop, Move::Right);
        }
        b.rule(loop, stop_sym, std::move(stop_acts), stop_state, stop_move);
    };
    digit_run("rdA1t", "rdAt", true, ",", "rdB1s", b.ids(), Move::Right);
    digit_run("rdA1s", "rdAs", false, ",", "rdB1t", b.ids(), Move::Right);
    digit_run("rdB1t", "rdBt", true, "E", "selE", two(work, "sub", restart, "half"), Move::Stay);
    digit_run("rdB1s", "rdBs", false, "E", "selE", two(work, "sub", restart, "half"), Move::Stay);

    // the prover's existential bit picks e_i or f_i
    b.comm("selE", "b?", {{"b1", "eT"}, {"b2", "eS"}, {"b?", "REJ"}});
    b.rule("eT", "E", b.ids(), "rdE1t", Move::Right);
    b.rule("eS", "E", b.ids(), "rdE1s", Move::Right);
    digit_run("rdE1t", "rdEt", true, ",", "rdF1s", b.ids(), Move::Right);
    digit_run("rdE1s", "rdEs", false, ",", "rdF1t", b.ids(), Move::Right);
    digit_run("rdF1t", "rdFt", true, "A", "coinw", two(work, "sub", coin, "flip"), Move::Stay);
    digit_run("rdF1s", "rdFs", false, "A", "coinw", two(work, "sub", coin, "flip"), Move::Stay);
    b.rule("rdFt", kRightMarker, one(work, "sub"), "wkw", Move::Stay);
    b.rule("rdFs", kRightMarker, one(work, "sub"), "wkw", Move::Stay);

    // end of round, scanned from the right marker: weigh the working
    // register, then gate the restart register
    b.weigh_rule("wkw", kRightMarker, work,
                 {{"rsg", Move::Stay}, {"REJ", Move::Stay}, {"REJ", Move::Stay},
                  {"REJ", Move::Stay}});
    b.rule("rsg", kRightMarker, one(restart, "gate"), "rsw", Move::Stay);
    b.weigh_rule("rsw", kRightMarker, restart, {{"ACC", Move::Stay}, {"RST", Move::Stay}});
    (void)all_syms;

    b.totalize("REJ");

    ProtocolBundle bundle;
    bundle.name = "knapsack-game";
    bundle.verifier = b.spec;
    bundle.epsilon = epsilon;
    bundle.round_structured = true;
    bundle.notes["delta"] = delta.str();

    bundle.membership = [](const Word& w) {
        try {
            return KnapsackInstance::parse_word(w).member();
        } catch (const MalformedInstanceError&) {
            return false;
        }
    };
    const int coin_idx = 1;
    bundle.honest_prover = [coin_idx](const Word& w) -> std::unique_ptr<ProverStrategy> {
        return std::make_unique<HonestKgProver>(w, coin_idx);
    };
    return bundle;
}

}  // namespace affam
