#include "affam/protocols.hpp"

#include "spec_builder.hpp"

namespace affam {

std::vector<std::string> protocol_names() {
    return {"middle", "mpal", "tm-weak", "tm-length", "tm-continuation", "atm", "kg",
            "kg-reduction"};
}

namespace {

TuringMachineSpec resolve_machine(const ProtocolParams& p) {
    if (p.machine) return *p.machine;
    if (p.machine_name.empty()) throw ConfigError("this protocol needs a machine");
    const auto catalog = sample_machines();
    auto it = catalog.find(p.machine_name);
    if (it == catalog.end()) throw ConfigError("unknown machine '" + p.machine_name + "'");
    return it->second;
}

}  // namespace

ProtocolBundle build_protocol(const std::string& name, const ProtocolParams& p) {
    if (name == "middle") return build_middle(p.epsilon, p.marked_symbol, p.semantics);
    if (name == "mpal") return build_mpal(p.alphabet, p.epsilon, p.marker, p.semantics);
    if (name == "tm-weak") return build_weak_tm(resolve_machine(p), p.epsilon, {});
    if (name == "tm-length") {
        TmStreamOptions opt;
        opt.enforce_linear_length = true;
        return build_weak_tm(resolve_machine(p), p.epsilon, opt);
    }
    if (name == "tm-continuation") {
        const ProtocolBundle weak = build_weak_tm(resolve_machine(p), p.epsilon, {});
        const auto kind = p.continuation_kind.value_or("exponential") == "polynomial"
                              ? ContinuationCheck::Kind::Polynomial
                              : ContinuationCheck::Kind::Exponential;
        return with_continuation_check(weak, kind, p.continuation_k, p.continuation_c, p.epsilon);
    }
    if (name == "atm") return build_atm(resolve_machine(p), p.epsilon, {});
    if (name == "kg") return build_kg(p.epsilon);
    if (name == "kg-reduction") return build_reduction(resolve_machine(p), p.epsilon);
    throw ConfigError("unknown protocol '" + name + "'");
}

}  // namespace affam
