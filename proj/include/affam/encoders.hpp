#pragma once

#include <cstddef>
#include <vector>

#include "affam/linalg.hpp"

namespace affam {

// Operator families that fold string values, polynomials and exponentials
// into affine registers one input symbol at a time.

// Digit-append operator: realizes value <- digit + base * value in the target
// entry, with the negation maintained in the balancing (last) entry so the
// register stays affine. target = 2 gives the 3-dim form; on a 4-dim register
// target may be 2 or 3 and the untouched value entry passes through.
//
// Folding digits most-significant-first this way is injective on fixed-length
// words, which is all any consumer here needs.
AffineOperator digit_append(long base, long digit, int target = 2, std::size_t dim = 3);

// Applies digit_append for each word symbol (digits, most significant first)
// to (1, 0, 0); the folded value ends up in entry 2 as (1, val, -val).
AffineState encode_value(const std::vector<long>& digits, long base);

// Plain integer fold used as the independent reference for encode_value and
// by protocol builders that need val() of a symbol string.
mpz_class fold_value(const std::vector<long>& digits, long base);

// Per-symbol operator bank for a degree-d polynomial p. Register layout is
// (1, l, l^2, ..., l^d, p(l), bal), dimension d+3; after reading l symbols
// starting from initial_state() the register holds exactly that vector.
class PolynomialEncoderBank {
public:
    // coefficients[k] multiplies l^k; size must be d+1.
    PolynomialEncoderBank(RVec coefficients, std::size_t degree);

    std::size_t degree() const { return degree_; }
    std::size_t dim() const { return degree_ + 3; }
    const AffineOperator& step_operator() const { return step_; }
    AffineState initial_state() const;

    // The binomial power-update alone: (1, l, ..., l^d, p, bal) advances the
    // power entries to l+1 and leaves p untouched.
    static AffineOperator power_update(std::size_t degree);

private:
    RVec coefficients_;
    std::size_t degree_;
    AffineOperator step_;
};

PolynomialEncoderBank polynomial_encoder(RVec coefficients, std::size_t degree);

// Two-state register encoding a^l: l applications to (1, 0) yield
// (a^l, 1 - a^l).
struct ExponentEncoder {
    Rational ratio;
    AffineOperator step;  // [[a, 0], [1-a, 1]]
    AffineState initial_state() const { return AffineState::basis(2, 1); }
};

ExponentEncoder exponent_encoder(const Rational& a);

// [[a,0],[1-a,1]]: scales the first entry by a, dumps the difference into the
// second. The exponent encoder's step and several protocol gates share this shape.
AffineOperator scale_first_entry(const Rational& a);

// Maps every affine state to e_1 (first row all ones). Used to re-arm
// registers that were collapsed by a weighting.
AffineOperator reset_to_first(std::size_t dim);

}  // namespace affam
