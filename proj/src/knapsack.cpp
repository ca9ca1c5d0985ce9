#include "affam/knapsack.hpp"

#include "affam/errors.hpp"

namespace affam {

std::string to_binary(const mpz_class& v) {
    if (v < 0) throw MalformedInstanceError("knapsack values are natural numbers");
    return v.get_str(2);
}

std::vector<std::string> binary_symbols(const mpz_class& v) {
    std::vector<std::string> out;
    for (char c : to_binary(v)) out.push_back(std::string(1, c));
    return out;
}

Word KnapsackInstance::to_word() const {
    Word w = binary_symbols(target);
    for (const auto& p : pairs) {
        w.push_back("A");
        for (auto& s : binary_symbols(p.a)) w.push_back(s);
        w.push_back(",");
        for (auto& s : binary_symbols(p.b)) w.push_back(s);
        w.push_back("E");
        for (auto& s : binary_symbols(p.e)) w.push_back(s);
        w.push_back(",");
        for (auto& s : binary_symbols(p.f)) w.push_back(s);
    }
    return w;
}

namespace {

mpz_class read_number(const Word& w, std::size_t& i) {
    mpz_class v = 0;
    bool any = false;
    while (i < w.size() && (w[i] == "0" || w[i] == "1")) {
        v = v * 2 + (w[i] == "1" ? 1 : 0);
        ++i;
        any = true;
    }
    if (!any) throw MalformedInstanceError("expected a binary number");
    return v;
}

void expect(const Word& w, std::size_t& i, const std::string& sym) {
    if (i >= w.size() || w[i] != sym)
        throw MalformedInstanceError("expected '" + sym + "' at position " + std::to_string(i));
    ++i;
}

}  // namespace

KnapsackInstance KnapsackInstance::parse_word(const Word& w) {
    KnapsackInstance inst;
    std::size_t i = 0;
    inst.target = read_number(w, i);
    while (i < w.size()) {
        expect(w, i, "A");
        KnapsackPair p;
        p.a = read_number(w, i);
        expect(w, i, ",");
        p.b = read_number(w, i);
        expect(w, i, "E");
        p.e = read_number(w, i);
        expect(w, i, ",");
        p.f = read_number(w, i);
        inst.pairs.push_back(std::move(p));
    }
    return inst;
}

bool KnapsackInstance::exists_wins(const mpz_class& residual, std::size_t next_pair) const {
    if (next_pair == pairs.size()) return residual == 0;
    const auto& p = pairs[next_pair];
    for (const mpz_class* x : {&p.a, &p.b}) {
        bool ok = false;
        for (const mpz_class* y : {&p.e, &p.f}) {
            if (exists_wins(residual - *x - *y, next_pair + 1)) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

bool KnapsackInstance::member() const { return exists_wins(target, 0); }

}  // namespace affam
