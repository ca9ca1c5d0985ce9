#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "affam/machine.hpp"

namespace affam {

// Deterministic map from the public transcript to the next reply symbol.
// Determinism (same transcript, same reply) is what makes exact evaluation
// possible; randomized provers are dominated by deterministic ones here
// because the system is public-coin.
class ProverStrategy {
public:
    virtual ~ProverStrategy() = default;

    // Returns the reply symbol id for the next communication step. `request`
    // is the symbol the verifier just wrote to the cell.
    virtual int reply(const Machine& m, const Transcript& t, int request) const = 0;

    // Evaluation paths whose machine configurations agree are merged when this
    // key also agrees; the key must determine every future reply. The default
    // (full transcript) never merges anything.
    virtual std::string memo_key(const Transcript& t) const { return t.key(); }
};

// Streams a fixed symbol sequence, then repeats `filler` forever. The memo
// key is the clamped reply count, so paths that have consumed the same prefix
// merge.
class ScriptedProver : public ProverStrategy {
public:
    ScriptedProver(std::vector<int> script, int filler)
        : script_(std::move(script)), filler_(filler) {}

    static ScriptedProver from_names(const Machine& m, const std::vector<std::string>& symbols,
                                     const std::string& filler);

    int reply(const Machine&, const Transcript& t, int) const override {
        const std::size_t n = t.reply_count();
        return n < script_.size() ? script_[n] : filler_;
    }

    std::string memo_key(const Transcript& t) const override {
        return std::to_string(std::min(t.reply_count(), script_.size()));
    }

private:
    std::vector<int> script_;
    int filler_;
};

// Adapts a plain function; useful for one-off strategies in tests.
class FunctionProver : public ProverStrategy {
public:
    using Fn = std::function<int(const Machine&, const Transcript&, int request)>;
    using KeyFn = std::function<std::string(const Transcript&)>;

    explicit FunctionProver(Fn fn) : fn_(std::move(fn)) {}
    FunctionProver(Fn fn, KeyFn key) : fn_(std::move(fn)), key_(std::move(key)) {}

    int reply(const Machine& m, const Transcript& t, int request) const override {
        return fn_(m, t, request);
    }
    std::string memo_key(const Transcript& t) const override {
        return key_ ? key_(t) : ProverStrategy::memo_key(t);
    }

private:
    Fn fn_;
    KeyFn key_;
};

}  // namespace affam
