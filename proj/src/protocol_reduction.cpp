#include "affam/encoders.hpp"
#include "spec_builder.hpp"
#include "tm_stream_core.hpp"

namespace affam {

namespace {

const std::set<std::string> kInstanceSymbols = {"0", "1", "A", "E", ","};

// Honest prover for the reduction pipeline: streams the machine's fixed
// computation history and answers the embedded game's selector bits from the
// emitted instance and the public coin outcomes.
class HonestReductionProver : public ProverStrategy {
public:
    HonestReductionProver(const TuringMachineSpec& machine, const Word& input, int coin_reg)
        : coin_reg_(coin_reg) {
        script_ = honest_stream_script(machine, input, 100000);
        TuringMachine tm(machine);
        const auto stream = tm.honest_stream(input, 100000);
        Word emitted;
        for (const auto& s : tm.extract_output(stream.configs)) emitted.push_back(s);
        try {
            instance_ = KnapsackInstance::parse_word(emitted);
            ok_ = true;
        } catch (const MalformedInstanceError&) {
            ok_ = false;
        }
    }

    int reply(const Machine& m, const Transcript& t, int request) const override {
        if (m.symbol_name(request) == "b?") {
            if (!ok_) return m.symbol_id("b1");
            const int b1 = m.symbol_id("b1");
            std::vector<int> xs;
            std::vector<bool> picks;
            int pending = -1;
            for (const auto& e : t.events) {
                if (e.kind == Event::Kind::Outcome && e.a == coin_reg_) xs.push_back(e.b);
                if (e.kind == Event::Kind::VerifierWrote) pending = e.a;
                if (e.kind == Event::Kind::ProverReplied && pending >= 0 &&
                    m.symbol_name(pending) == "b?")
                    picks.push_back(e.a == b1);
            }
            const std::size_t i = picks.size();
            if (i >= instance_.pairs.size() || i >= xs.size()) return b1;
            mpz_class residual = instance_.target;
            for (std::size_t j = 0; j < i; ++j) {
                residual -= xs[j] == 1 ? instance_.pairs[j].a : instance_.pairs[j].b;
                residual -= picks[j] ? instance_.pairs[j].e : instance_.pairs[j].f;
            }
            const auto& p = instance_.pairs[i];
            residual -= xs[i] == 1 ? p.a : p.b;
            return m.symbol_id(instance_.exists_wins(residual - p.e, i + 1) ? "b1" : "b2");
        }
        // plain stream request: count only stream replies
        std::size_t served = 0;
        int pending = -1;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::VerifierWrote) pending = e.a;
            if (e.kind == Event::Kind::ProverReplied && pending >= 0 &&
                m.symbol_name(pending) == "?")
                ++served;
        }
        return m.symbol_id(served < script_.size() ? script_[served] : "#");
    }

    std::string memo_key(const Transcript& t) const override {
        std::string k;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::ProverReplied) k += "r" + std::to_string(e.a);
            if (e.kind == Event::Kind::Outcome && e.a == coin_reg_) k += "o" + std::to_string(e.b);
        }
        return k;
    }

private:
    std::vector<std::string> script_;
    KnapsackInstance instance_;
    bool ok_ = false;
    int coin_reg_;
};

// Adversary confined to the honest stream but free on the selector bits.
class ReductionMenu : public ReplyMenu {
public:
    ReductionMenu(std::vector<std::string> script, int coin_reg)
        : script_(std::move(script)), coin_reg_(coin_reg) {}

    std::vector<int> options(const Machine& m, const Transcript& t, int request) const override {
        if (m.symbol_name(request) == "b?") return {m.symbol_id("b1"), m.symbol_id("b2")};
        std::size_t served = 0;
        int pending = -1;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::VerifierWrote) pending = e.a;
            if (e.kind == Event::Kind::ProverReplied && pending >= 0 &&
                m.symbol_name(pending) == "?")
                ++served;
        }
        return {m.symbol_id(served < script_.size() ? script_[served] : "#")};
    }

    std::string memo_key(const Transcript& t) const override {
        std::string k;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::ProverReplied) k += "r" + std::to_string(e.a);
            if (e.kind == Event::Kind::Outcome && e.a == coin_reg_) k += "o" + std::to_string(e.b);
        }
        return k;
    }

private:
    std::vector<std::string> script_;
    int coin_reg_;
};

}  // namespace

ProtocolBundle build_reduction(const TuringMachineSpec& reduction_machine,
                               const Rational& epsilon) {
    detail::require_epsilon(epsilon);
    if (reduction_machine.flavor != TMFlavor::Deterministic)
        throw FlavorError("reduction machines are deterministic");
    const TuringMachineSpec finalized = finalize_machine(reduction_machine);
    if (finalized.outputs.empty())
        throw OutputConventionError("a reduction machine must emit output symbols");
    for (const auto& [q, sym] : finalized.outputs) {
        (void)q;
        if (!kInstanceSymbols.count(sym))
            throw OutputConventionError("output symbol '" + sym +
                                        "' is outside the instance alphabet");
    }

    detail::StreamBuildOptions opt;
    opt.kg_embed = true;
    opt.length_check = true;
    opt.restart_register = true;
    opt.restart_delta = Rational(2, 3) * epsilon;
    opt.halving = detail::StreamBuildOptions::Halving::PerPair;

    ProtocolBundle bundle;
    bundle.name = "kg-reduction";
    bundle.verifier = detail::build_stream_verifier(finalized, epsilon, opt);
    bundle.epsilon = epsilon;
    bundle.machine = finalized;
    bundle.round_structured = true;
    bundle.notes["restart_delta"] = opt.restart_delta.str();

    int coin_reg = -1;
    for (std::size_t i = 0; i < bundle.verifier.registers.size(); ++i)
        if (bundle.verifier.registers[i].name == "coin") coin_reg = static_cast<int>(i);

    bundle.membership = [finalized](const Word& w) {
        TuringMachine tm(finalized);
        const auto stream = tm.honest_stream(w, 100000);
        if (stream.truncated) return false;
        const auto& last = stream.configs.back();
        if (last[tm.state_position(last)] != finalized.accept) return false;
        Word emitted;
        for (const auto& s : tm.extract_output(stream.configs)) emitted.push_back(s);
        try {
            return KnapsackInstance::parse_word(emitted).member();
        } catch (const MalformedInstanceError&) {
            return false;
        }
    };
    bundle.honest_prover = [finalized, coin_reg](const Word& w) -> std::unique_ptr<ProverStrategy> {
        return std::make_unique<HonestReductionProver>(finalized, w, coin_reg);
    };
    bundle.adversary_menu = [finalized, coin_reg](const Word& w) -> std::unique_ptr<ReplyMenu> {
        return std::make_unique<ReductionMenu>(honest_stream_script(finalized, w, 100000),
                                               coin_reg);
    };
    return bundle;
}

}  // namespace affam
