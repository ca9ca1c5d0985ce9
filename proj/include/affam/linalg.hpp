#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "affam/rational.hpp"

namespace affam {

// Vector with exact entry-sum 1. Entries may be negative or exceed 1.
// Immutable after construction; freely shareable.
class AffineState {
public:
    // Throws NormalizationError unless the entries sum to exactly 1.
    explicit AffineState(RVec entries);

    static AffineState basis(std::size_t dim, std::size_t index);  // e_{index}, 1-based

    std::size_t dim() const { return entries_.size(); }
    const Rational& operator[](std::size_t i) const { return entries_[i]; }  // 0-based
    const RVec& entries() const { return entries_; }

    friend bool operator==(const AffineState& a, const AffineState& b) {
        return a.entries_ == b.entries_;
    }
    friend bool operator!=(const AffineState& a, const AffineState& b) { return !(a == b); }

    std::string str() const;

private:
    RVec entries_;
};

// Square matrix whose columns each sum to exactly 1; acts on states by
// matrix-vector product, which preserves the entry-sum invariant.
class AffineOperator {
public:
    // rows[i][j] is the coefficient of input entry j in output entry i.
    // Throws ColumnSumError if any column does not sum to 1, DimensionError
    // if the matrix is not square.
    explicit AffineOperator(std::vector<RVec> rows);

    static AffineOperator identity(std::size_t dim);

    // Skips the column-sum check. Only for deserialization paths, so that
    // validate() can report a bad matrix instead of nothing ever existing.
    static AffineOperator unchecked(std::vector<RVec> rows);

    bool columns_sum_to_one() const;

    std::size_t dim() const { return rows_.size(); }
    const Rational& at(std::size_t i, std::size_t j) const { return rows_[i][j]; }
    const std::vector<RVec>& rows() const { return rows_; }

    friend bool operator==(const AffineOperator& a, const AffineOperator& b) {
        return a.rows_ == b.rows_;
    }
    friend bool operator!=(const AffineOperator& a, const AffineOperator& b) { return !(a == b); }

    std::string str() const;

private:
    std::vector<RVec> rows_;
};

// v' = op v. Throws DimensionError on mismatch.
AffineState apply(const AffineOperator& op, const AffineState& v);

// compose(g, f) applies f first: apply(compose(g,f), v) == apply(g, apply(f, v)).
AffineOperator compose(const AffineOperator& g, const AffineOperator& f);

// Exact inverse over the rationals. Throws SingularError when det = 0.
AffineOperator inverse(const AffineOperator& op);

// Result of the weighting operation: outcome j is observed with probability
// |v_j| / ||v||_1. Collapse to e_j is the caller's step; this only reports
// the exact distribution.
struct WeightDistribution {
    RVec probabilities;  // sums to exactly 1, entries in [0,1]
    Rational l1_norm;    // >= 1 for any affine state
};

WeightDistribution weight(const AffineState& v);

// Operator on the register layout (x_1..x_n, y, bal), dimension n+2: maps y
// to s = sum_i c_i x_i, keeps every x_i, and adjusts bal so the entry-sum
// stays 1. Requires coefficients.size() == n.
AffineOperator linear_combination_gadget(std::size_t n, const RVec& coefficients);

AffineState make_state(RVec entries);  // alias of the checked constructor

}  // namespace affam
