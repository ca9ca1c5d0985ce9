#include "affam/protocols.hpp"

#include "spec_builder.hpp"

namespace affam {

namespace detail {

void require_epsilon(const Rational& epsilon, bool allow_half) {
    const bool ok = epsilon > Rational(0) &&
                    (epsilon < Rational(1, 2) || (allow_half && epsilon == Rational(1, 2)));
    if (!ok) throw EpsilonRangeError("error bound must lie in (0, 1/2), got " + epsilon.str());
}

std::vector<long> first_primes(std::size_t n) {
    std::vector<long> out;
    long p = 2;
    while (out.size() < n) {
        bool prime = true;
        for (long d = 2; d * d <= p; ++d)
            if (p % d == 0) {
                prime = false;
                break;
            }
        if (prime) out.push_back(p);
        ++p;
    }
    return out;
}

}  // namespace detail

ProtocolBundle build_middle(const Rational& epsilon, const std::string& marked_symbol,
                            MiddleSemantics semantics) {
    detail::require_epsilon(epsilon);
    const std::vector<std::string> alphabet = {"0", "1"};
    if (semantics == MiddleSemantics::MarkedSymbol &&
        std::find(alphabet.begin(), alphabet.end(), marked_symbol) == alphabet.end())
        throw SpecError("marked symbol must be an input symbol");

    const Rational delta = (Rational(1) - epsilon) / (Rational(2) * epsilon);

    detail::SpecBuilder b(Mode::OneWay);
    b.spec.name = "middle";
    b.spec.input_alphabet = alphabet;
    b.spec.gamma = {"yes", "no", "?"};

    const std::size_t reg = b.add_register("ctr", 3, {1});
    b.add_op(reg, "I", AffineOperator::identity(3));
    // one count step per pre-middle symbol, undone per post-middle symbol
    AffineOperator inc({{Rational(1), Rational(0), Rational(0)},
                        {Rational(1), Rational(1), Rational(0)},
                        {Rational(-1), Rational(0), Rational(1)}});
    b.add_op(reg, "inc", inc);
    b.add_op(reg, "dec", inverse(inc));
    // scales the residual count by delta before the final weighting
    b.add_op(reg, "bias",
             AffineOperator({{Rational(1), Rational(1) - delta, Rational(1) - delta},
                             {Rational(0), delta, Rational(0)},
                             {Rational(0), Rational(0), delta}}));

    b.spec.initial = "init";
    b.state("init");
    b.spec.accept_states = {"acc"};
    b.state("acc");
    b.state("sink");

    auto one = [&](const std::string& op) {
        std::vector<AffineAction> a = b.ids();
        a[reg] = AffineAction::apply_op(op);
        return a;
    };

    b.rule("init", kLeftMarker, b.ids(), "ask", Move::Right);
    b.comm("ask", "?", {{"yes", "yes"}, {"no", "no"}, {"?", "sink"}});
    b.comm("p2ask", "?", {{"yes", "p2yes"}, {"no", "p2no"}, {"?", "sink"}});

    for (const auto& s : alphabet) {
        b.rule("no", s, one("inc"), "ask", Move::Right);
        const bool is_middle = semantics == MiddleSemantics::AnySymbol || s == marked_symbol;
        b.rule("yes", s, b.ids(), is_middle ? "p2ask" : "sink", Move::Right);
        b.rule("p2no", s, one("dec"), "p2ask", Move::Right);
        b.rule("p2yes", s, b.ids(), "sink", Move::Right);
        b.rule("sink", s, b.ids(), "sink", Move::Right);
    }
    // claims at the end-marker are invalid middles; an unclaimed run rejects
    b.rule("no", kRightMarker, b.ids(), "sink", Move::Right);
    b.rule("yes", kRightMarker, b.ids(), "sink", Move::Right);
    b.rule("p2yes", kRightMarker, b.ids(), "sink", Move::Right);
    b.rule("p2no", kRightMarker, one("bias"), "acc", Move::Right);
    b.rule("sink", kRightMarker, b.ids(), "sink", Move::Right);
    b.totalize("sink");

    ProtocolBundle bundle;
    bundle.name = "middle";
    bundle.verifier = b.spec;
    bundle.epsilon = epsilon;
    bundle.notes["delta"] = delta.str();
    bundle.notes["marked_symbol"] = marked_symbol;

    const std::string marked = marked_symbol;
    bundle.membership = [marked, semantics](const Word& w) {
        if (w.size() % 2 == 0) return false;
        return semantics == MiddleSemantics::AnySymbol || w[w.size() / 2] == marked;
    };
    bundle.honest_prover = [marked, semantics](const Word& w) -> std::unique_ptr<ProverStrategy> {
        // One reply per scanned cell, end-marker included. On members: "no"
        // until the middle, one "yes", then "no". Otherwise never claim.
        std::vector<std::string> script;
        const bool member =
            w.size() % 2 == 1 &&
            (semantics == MiddleSemantics::AnySymbol || w[w.size() / 2] == marked);
        if (member) {
            for (std::size_t i = 0; i < w.size() / 2; ++i) script.push_back("no");
            script.push_back("yes");
        }
        return std::make_unique<FunctionProver>(
            [script](const Machine& m, const Transcript& t, int) {
                const std::size_t i = t.reply_count();
                return m.symbol_id(i < script.size() ? script[i] : "no");
            },
            [script](const Transcript& t) {
                return std::to_string(std::min(t.reply_count(), script.size()));
            });
    };
    return bundle;
}

}  // namespace affam
