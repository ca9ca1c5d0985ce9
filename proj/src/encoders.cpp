#include "affam/encoders.hpp"

#include <utility>

#include "affam/errors.hpp"

namespace affam {

AffineOperator digit_append(long base, long digit, int target, std::size_t dim) {
    if (base < 1) throw DigitRangeError("base must be positive");
    if (digit < 0 || digit >= base) throw DigitRangeError("digit out of [0, base)");
    if (dim < 3) throw DimensionError("digit append needs dimension >= 3");
    if (target < 2 || static_cast<std::size_t>(target) >= dim)
        throw DimensionError("digit append target must be an interior entry");
    const std::size_t t = static_cast<std::size_t>(target) - 1;  // 0-based row
    const std::size_t last = dim - 1;
    std::vector<RVec> rows(dim, RVec(dim, Rational(0)));
    for (std::size_t i = 0; i < dim; ++i) rows[i][i] = Rational(1);
    rows[t][0] = Rational(digit);
    rows[t][t] = Rational(base);
    rows[last][0] = Rational(-digit);
    rows[last][t] = Rational(1 - base);
    return AffineOperator(std::move(rows));
}

AffineState encode_value(const std::vector<long>& digits, long base) {
    AffineState v = AffineState::basis(3, 1);
    for (long d : digits) v = apply(digit_append(base, d), v);
    return v;
}

mpz_class fold_value(const std::vector<long>& digits, long base) {
    mpz_class v = 0;
    for (long d : digits) {
        if (d < 0 || d >= base) throw DigitRangeError("digit out of [0, base)");
        v = v * base + d;
    }
    return v;
}

AffineOperator PolynomialEncoderBank::power_update(std::size_t degree) {
    // Row for power k holds the binomial coefficients C(k, j), j <= k, so the
    // power entries advance from l to l+1 in one application.
    const std::size_t m = degree + 3;
    std::vector<RVec> rows(m, RVec(m, Rational(0)));
    std::vector<std::vector<mpz_class>> binom(degree + 1);
    for (std::size_t k = 0; k <= degree; ++k) {
        binom[k].resize(k + 1);
        for (std::size_t j = 0; j <= k; ++j) {
            if (j == 0 || j == k)
                binom[k][j] = 1;
            else
                binom[k][j] = binom[k - 1][j - 1] + binom[k - 1][j];
        }
    }
    for (std::size_t k = 0; k <= degree; ++k)
        for (std::size_t j = 0; j <= k; ++j) rows[k][j] = Rational(binom[k][j]);
    rows[degree + 1][degree + 1] = Rational(1);  // p entry passes through
    for (std::size_t j = 0; j <= degree; ++j) {
        Rational col;
        for (std::size_t k = j; k <= degree; ++k) col += Rational(binom[k][j]);
        rows[degree + 2][j] = Rational(1) - col;
    }
    rows[degree + 2][degree + 2] = Rational(1);
    return AffineOperator(std::move(rows));
}

PolynomialEncoderBank::PolynomialEncoderBank(RVec coefficients, std::size_t degree)
    : coefficients_(std::move(coefficients)),
      degree_(degree),
      step_(AffineOperator::identity(degree + 3)) {
    if (coefficients_.size() != degree_ + 1)
        throw DimensionError("polynomial encoder needs degree+1 coefficients");
    // One operator per symbol: advance the powers, then refresh p from them.
    RVec gadget_coeffs = coefficients_;  // inputs are the d+1 power entries
    AffineOperator evaluate = linear_combination_gadget(degree_ + 1, gadget_coeffs);
    step_ = compose(evaluate, power_update(degree_));
}

AffineState PolynomialEncoderBank::initial_state() const {
    // (1, 0, ..., 0, p(0), -p(0)): valid for l = 0 as well.
    RVec v(dim(), Rational(0));
    v[0] = Rational(1);
    v[degree_ + 1] = coefficients_[0];
    v[degree_ + 2] = -coefficients_[0];
    return AffineState(std::move(v));
}

PolynomialEncoderBank polynomial_encoder(RVec coefficients, std::size_t degree) {
    return PolynomialEncoderBank(std::move(coefficients), degree);
}

AffineOperator scale_first_entry(const Rational& a) {
    std::vector<RVec> rows{{a, Rational(0)}, {Rational(1) - a, Rational(1)}};
    return AffineOperator(std::move(rows));
}

ExponentEncoder exponent_encoder(const Rational& a) {
    return ExponentEncoder{a, scale_first_entry(a)};
}

AffineOperator reset_to_first(std::size_t dim) {
    std::vector<RVec> rows(dim, RVec(dim, Rational(0)));
    for (std::size_t j = 0; j < dim; ++j) rows[0][j] = Rational(1);
    return AffineOperator(std::move(rows));
}

}  // namespace affam
