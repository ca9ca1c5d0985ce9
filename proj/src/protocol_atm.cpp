#include "affam/encoders.hpp"
#include "spec_builder.hpp"
#include "tm_stream_core.hpp"

namespace affam {

namespace {

// Alternating-tree value from an arbitrary configuration.
bool subtree_accepts(const TuringMachine& tm, const TMConfig& c, std::size_t depth) {
    const std::string& q = c[tm.state_position(c)];
    if (q == tm.spec().accept) return true;
    if (q == tm.spec().reject) return false;
    if (depth == 0) throw MachineError("alternating run exceeded the depth bound");
    const auto succ = tm.next_config(c);
    if (succ.size() == 1) return subtree_accepts(tm, succ[0], depth - 1);
    const auto lab = tm.spec().labels.at(q);
    const bool left = subtree_accepts(tm, succ[0], depth - 1);
    if (lab == Quantifier::Existential) return left || subtree_accepts(tm, succ[1], depth - 1);
    return left && subtree_accepts(tm, succ[1], depth - 1);
}

// Shared transcript replay for the alternating protocol: reconstructs the
// configuration path and the planned symbol stream from branch replies and
// public coin outcomes, extending the plan eagerly through non-branching
// steps.
struct AtmReplay {
    const TuringMachine& tm;
    int coin_reg;
    std::vector<TMConfig> configs;
    std::vector<std::string> plan;
    std::size_t symbols_served = 0;

    AtmReplay(const TuringMachine& tm, int coin_reg, const Word& input)
        : tm(tm), coin_reg(coin_reg) {
        configs.push_back(tm.initial_config(input));
        push_plan(configs.back());
        extend();
    }

    void push_plan(const TMConfig& c) {
        plan.insert(plan.end(), c.begin(), c.end());
        plan.push_back("#");
    }

    bool last_is_branching() const {
        const TMConfig& c = configs.back();
        const std::string& q = c[tm.state_position(c)];
        if (tm.is_halting_state(q)) return false;
        return tm.spec().labels.count(q) > 0;
    }

    // Extend through deterministic (unlabeled) steps; branching steps wait
    // for a coin outcome or a prover bit.
    void extend() {
        while (true) {
            const TMConfig& c = configs.back();
            const std::string& q = c[tm.state_position(c)];
            if (tm.is_halting_state(q) || tm.spec().labels.count(q)) return;
            configs.push_back(tm.next_config(c)[0]);
            push_plan(configs.back());
        }
    }

    void resolve(std::size_t branch) {
        configs.push_back(tm.next_config(configs.back())[branch]);
        push_plan(configs.back());
        extend();
    }

    void feed(const Machine& m, const Transcript& t, int b1_id) {
        int pending = -1;  // last request written
        for (const auto& e : t.events) {
            switch (e.kind) {
                case Event::Kind::VerifierWrote: pending = e.a; break;
                case Event::Kind::ProverReplied:
                    if (pending >= 0 && m.symbol_name(pending) == "b?")
                        resolve(e.a == b1_id ? 0 : 1);
                    else
                        ++symbols_served;
                    pending = -1;
                    break;
                case Event::Kind::Outcome:
                    if (e.a == coin_reg) resolve(static_cast<std::size_t>(e.b - 1));
                    break;
                default: break;
            }
        }
    }

    std::string key() const {
        std::string k = std::to_string(symbols_served) + "/" + std::to_string(plan.size()) + "|";
        k += config_to_string(configs.back());
        k += last_is_branching() ? "+" : ".";
        return k;
    }
};

int find_register(const VerifierSpec& spec, const std::string& name) {
    for (std::size_t i = 0; i < spec.registers.size(); ++i)
        if (spec.registers[i].name == name) return static_cast<int>(i);
    return -1;
}

class HonestAtmProver : public ProverStrategy {
public:
    HonestAtmProver(TuringMachineSpec machine, Word input, int coin_reg)
        : tm_(std::move(machine)), input_(std::move(input)), coin_reg_(coin_reg) {}

    int reply(const Machine& m, const Transcript& t, int request) const override {
        AtmReplay rp(tm_, coin_reg_, input_);
        rp.feed(m, t, m.symbol_id("b1"));
        if (m.symbol_name(request) == "b?") {
            // choose the branch whose subtree accepts, if any
            const auto succ = tm_.next_config(rp.configs.back());
            std::size_t pick = 0;
            if (!subtree_accepts(tm_, succ[0], 4096) && succ.size() > 1 &&
                subtree_accepts(tm_, succ[1], 4096))
                pick = 1;
            return m.symbol_id(pick == 0 ? "b1" : "b2");
        }
        if (rp.symbols_served < rp.plan.size()) return m.symbol_id(rp.plan[rp.symbols_served]);
        return m.symbol_id("#");
    }

    std::string memo_key(const Transcript& t) const override {
        // replies and coin outcomes determine the replay state, and with it
        // every future reply
        std::string k;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::ProverReplied) k += "r" + std::to_string(e.a);
            if (e.kind == Event::Kind::Outcome && e.a == coin_reg_)
                k += "o" + std::to_string(e.b);
        }
        return k;
    }

private:
    TuringMachine tm_;
    Word input_;
    int coin_reg_;
};

// Constrained adversary: free over both bits at existential branch requests,
// honest on the stream itself (the valid-stream existential game).
class AtmStreamMenu : public ReplyMenu {
public:
    AtmStreamMenu(TuringMachineSpec machine, Word input, int coin_reg)
        : tm_(std::move(machine)), input_(std::move(input)), coin_reg_(coin_reg) {}

    std::vector<int> options(const Machine& m, const Transcript& t, int request) const override {
        if (m.symbol_name(request) == "b?") return {m.symbol_id("b1"), m.symbol_id("b2")};
        AtmReplay rp(tm_, coin_reg_, input_);
        rp.feed(m, t, m.symbol_id("b1"));
        if (rp.symbols_served < rp.plan.size())
            return {m.symbol_id(rp.plan[rp.symbols_served])};
        return {m.symbol_id("#")};
    }

    std::string memo_key(const Transcript& t) const override {
        // good enough: the full decision-relevant history
        std::string k;
        for (const auto& e : t.events) {
            if (e.kind == Event::Kind::ProverReplied) k += "r" + std::to_string(e.a);
            if (e.kind == Event::Kind::Outcome && e.a == coin_reg_)
                k += "o" + std::to_string(e.b);
        }
        return k;
    }

private:
    TuringMachine tm_;
    Word input_;
    int coin_reg_;
};

}  // namespace

ProtocolBundle build_atm(const TuringMachineSpec& machine, const Rational& epsilon,
                         const AtmOptions& options) {
    detail::require_epsilon(epsilon);
    if (machine.flavor != TMFlavor::Alternating)
        throw FlavorError("build_atm runs alternating machines; see build_weak_tm");
    const TuringMachineSpec finalized = finalize_machine(machine);

    detail::StreamBuildOptions opt;
    opt.atm = true;
    opt.length_check = true;  // bounds every round via the idle input head
    opt.restart_register = true;
    opt.restart_ratio = options.restart_ratio;
    opt.restart_delta = options.gate_delta.value_or(epsilon);
    opt.halving = detail::StreamBuildOptions::Halving::PerSymbol;

    ProtocolBundle bundle;
    bundle.name = "atm-stream";
    bundle.verifier = detail::build_stream_verifier(finalized, epsilon, opt);
    bundle.epsilon = epsilon;
    bundle.machine = finalized;
    bundle.round_structured = true;
    bundle.notes["restart_ratio"] = options.restart_ratio.str();
    bundle.notes["restart_delta"] = opt.restart_delta.str();

    const int coin_reg = find_register(bundle.verifier, "coin");
    bundle.membership = [finalized](const Word& w) {
        return TuringMachine(finalized).atm_accepts(w, 4096);
    };
    bundle.honest_prover = [finalized, coin_reg](const Word& w) -> std::unique_ptr<ProverStrategy> {
        return std::make_unique<HonestAtmProver>(finalized, w, coin_reg);
    };
    bundle.adversary_menu = [finalized, coin_reg](const Word& w) -> std::unique_ptr<ReplyMenu> {
        return std::make_unique<AtmStreamMenu>(finalized, w, coin_reg);
    };
    return bundle;
}

}  // namespace affam
