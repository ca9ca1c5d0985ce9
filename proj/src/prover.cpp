#include "affam/prover.hpp"

namespace affam {

ScriptedProver ScriptedProver::from_names(const Machine& m, const std::vector<std::string>& symbols,
                                          const std::string& filler) {
    std::vector<int> script;
    script.reserve(symbols.size());
    for (const auto& s : symbols) script.push_back(m.symbol_id(s));
    return ScriptedProver(std::move(script), m.symbol_id(filler));
}

}  // namespace affam
