#include "affam/protocols.hpp"

#include "spec_builder.hpp"

namespace affam {

ProtocolBundle build_mpal(const std::vector<std::string>& alphabet, const Rational& epsilon,
                          const std::string& marker, MiddleSemantics semantics) {
    detail::require_epsilon(epsilon);
    if (alphabet.empty()) throw SpecError("mpal needs a nonempty alphabet");
    for (const auto& s : alphabet)
        if (s == marker) throw SpecError("the middle marker must lie outside the alphabet");

    const std::size_t n = alphabet.size();
    const std::size_t dim = n + 2;
    const Rational delta = Rational(2) * (Rational(1) - epsilon) / epsilon;
    const auto primes = detail::first_primes(n);

    detail::SpecBuilder b(Mode::OneWay);
    b.spec.name = "mpal";
    b.spec.input_alphabet = alphabet;
    b.spec.input_alphabet.push_back(marker);
    b.spec.gamma = {"yes", "no", "?"};

    const std::size_t reg = b.add_register("mirror", dim, {1});
    b.add_op(reg, "I", AffineOperator::identity(dim));
    for (std::size_t k = 0; k < n; ++k) {
        // acts on entries 1 and k+2 only: v1 scales by the k-th prime
        auto rows = AffineOperator::identity(dim).rows();
        rows[0][0] = Rational(primes[k]);
        rows[k + 1][0] = Rational(1 - primes[k]);
        AffineOperator push(rows);
        b.add_op(reg, "push_" + alphabet[k], push);
        b.add_op(reg, "pop_" + alphabet[k], inverse(push));
    }
    {
        auto rows = std::vector<RVec>(dim, RVec(dim, Rational(0)));
        rows[0][0] = Rational(1);
        for (std::size_t k = 1; k <= n; ++k) {
            rows[k][k] = delta;
            rows[dim - 1][k] = Rational(1) - delta;
        }
        rows[dim - 1][dim - 1] = Rational(1);
        b.add_op(reg, "bias", AffineOperator(std::move(rows)));
    }

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
        b.rule("no", s, one("push_" + s), "ask", Move::Right);
        b.rule("p2no", s, one("pop_" + s), "p2ask", Move::Right);
        b.rule("yes", s,
               b.ids(), semantics == MiddleSemantics::AnySymbol ? "p2ask" : "sink", Move::Right);
    }
    // an off-middle marker is an immediate mismatch in the marked reading
    b.rule("no", marker, b.ids(), semantics == MiddleSemantics::AnySymbol ? "ask" : "sink",
           Move::Right);
    b.rule("p2no", marker, b.ids(), semantics == MiddleSemantics::AnySymbol ? "p2ask" : "sink",
           Move::Right);
    b.rule("yes", marker, b.ids(), "p2ask", Move::Right);
    b.rule("no", kRightMarker, b.ids(), "sink", Move::Right);
    b.rule("yes", kRightMarker, b.ids(), "sink", Move::Right);
    b.rule("p2no", kRightMarker, one("bias"), "acc", Move::Right);
    b.totalize("sink");

    ProtocolBundle bundle;
    bundle.name = "mpal";
    bundle.verifier = b.spec;
    bundle.epsilon = epsilon;
    bundle.notes["delta"] = delta.str();
    bundle.notes["marker"] = marker;

    const std::string mk = marker;
    const std::vector<std::string> ab = alphabet;
    bundle.membership = [mk, ab, semantics](const Word& w) {
        if (w.size() % 2 == 0) return false;
        const std::size_t mid = w.size() / 2;
        if (semantics == MiddleSemantics::MarkedSymbol && w[mid] != mk) return false;
        for (std::size_t i = 0; i < mid; ++i) {
            if (w[i] != w[w.size() - 1 - i]) return false;
            if (w[i] == mk) return false;  // the mirrored halves stay inside the alphabet
        }
        return true;
    };
    bundle.honest_prover = [mk, semantics](const Word& w) -> std::unique_ptr<ProverStrategy> {
        std::vector<std::string> script;
        bool member = w.size() % 2 == 1;
        if (member && semantics == MiddleSemantics::MarkedSymbol) member = w[w.size() / 2] == mk;
        if (member)
            for (std::size_t i = 0; i < w.size() / 2; ++i) {
                if (w[i] != w[w.size() - 1 - i] || w[i] == mk) {
                    member = false;
                    break;
                }
            }
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
