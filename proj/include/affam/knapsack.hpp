#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

#include "affam/machine.hpp"

namespace affam {

// Knapsack-game instance: a target S followed by quantifier pairs
//   forall (a_i, b_i)  exists (e_i, f_i),
// all natural numbers in binary. Instance words use the alphabet
// {0, 1, A, E, ,} as  S A a , b E e , f A ...
//
// Membership is the alternating game: for pair i the universal side picks
// x_i in {a_i, b_i} before the existential side answers y_i in {e_i, f_i},
// and the existential side wins iff S = sum(x_i + y_i). (The protocol's
// verifier draws the universal choices from public coins in exactly this
// interleaved order, so the game reading is the one its completeness needs.)
struct KnapsackPair {
    mpz_class a, b, e, f;
};

struct KnapsackInstance {
    mpz_class target;
    std::vector<KnapsackPair> pairs;

    Word to_word() const;

    // MalformedInstanceError on anything that is not S (A a , b E e , f)*.
    // Leading zeros are tolerated; values are what count.
    static KnapsackInstance parse_word(const Word& w);

    // Brute-force game evaluation over all universal/existential choices.
    bool member() const;

    // True iff the existential player can still force a win from pair
    // `next_pair` with the given residual target.
    bool exists_wins(const mpz_class& residual, std::size_t next_pair) const;
};

std::string to_binary(const mpz_class& v);
std::vector<std::string> binary_symbols(const mpz_class& v);

}  // namespace affam
