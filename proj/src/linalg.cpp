#include "affam/linalg.hpp"

#include <sstream>
#include <utility>

#include "affam/errors.hpp"

namespace affam {

AffineState::AffineState(RVec entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw DimensionError("affine state needs at least one entry");
    if (sum(entries_) != Rational(1))
        throw NormalizationError("affine state entries must sum to 1, got " + sum(entries_).str());
}

AffineState AffineState::basis(std::size_t dim, std::size_t index) {
    if (index < 1 || index > dim) throw DimensionError("basis index out of range");
    RVec e(dim, Rational(0));
    e[index - 1] = Rational(1);
    return AffineState(std::move(e));
}

std::string AffineState::str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (i) os << ", ";
        os << entries_[i];
    }
    os << ")";
    return os.str();
}

AffineState make_state(RVec entries) { return AffineState(std::move(entries)); }

AffineOperator::AffineOperator(std::vector<RVec> rows) : rows_(std::move(rows)) {
    const std::size_t m = rows_.size();
    if (m == 0) throw DimensionError("affine operator needs at least one row");
    for (const auto& r : rows_)
        if (r.size() != m) throw DimensionError("affine operator must be square");
    for (std::size_t j = 0; j < m; ++j) {
        Rational col;
        for (std::size_t i = 0; i < m; ++i) col += rows_[i][j];
        if (col != Rational(1))
            throw ColumnSumError("column " + std::to_string(j + 1) + " sums to " + col.str());
    }
}

AffineOperator AffineOperator::identity(std::size_t dim) {
    std::vector<RVec> rows(dim, RVec(dim, Rational(0)));
    for (std::size_t i = 0; i < dim; ++i) rows[i][i] = Rational(1);
    return AffineOperator(std::move(rows));
}

AffineOperator AffineOperator::unchecked(std::vector<RVec> rows) {
    AffineOperator op = identity(1);
    op.rows_ = std::move(rows);
    if (op.rows_.empty()) throw DimensionError("affine operator needs at least one row");
    for (const auto& r : op.rows_)
        if (r.size() != op.rows_.size()) throw DimensionError("affine operator must be square");
    return op;
}

bool AffineOperator::columns_sum_to_one() const {
    for (std::size_t j = 0; j < dim(); ++j) {
        Rational col;
        for (std::size_t i = 0; i < dim(); ++i) col += rows_[i][j];
        if (col != Rational(1)) return false;
    }
    return true;
}

std::string AffineOperator::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        os << (i ? "\n" : "") << "[";
        for (std::size_t j = 0; j < rows_[i].size(); ++j) {
            if (j) os << ", ";
            os << rows_[i][j];
        }
        os << "]";
    }
    return os.str();
}

AffineState apply(const AffineOperator& op, const AffineState& v) {
    if (op.dim() != v.dim()) throw DimensionError("operator/state dimension mismatch");
    RVec out(op.dim());
    for (std::size_t i = 0; i < op.dim(); ++i) {
        Rational acc;
        for (std::size_t j = 0; j < op.dim(); ++j) {
            if (!op.at(i, j).is_zero() && !v[j].is_zero()) acc += op.at(i, j) * v[j];
        }
        out[i] = acc;
    }
    return AffineState(std::move(out));
}

AffineOperator compose(const AffineOperator& g, const AffineOperator& f) {
    if (g.dim() != f.dim()) throw DimensionError("operator dimension mismatch in compose");
    const std::size_t m = g.dim();
    std::vector<RVec> rows(m, RVec(m, Rational(0)));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < m; ++k) {
            const Rational& gik = g.at(i, k);
            if (gik.is_zero()) continue;
            for (std::size_t j = 0; j < m; ++j) {
                if (f.at(k, j).is_zero()) continue;
                rows[i][j] += gik * f.at(k, j);
            }
        }
    return AffineOperator(std::move(rows));
}

AffineOperator inverse(const AffineOperator& op) {
    // Gauss-Jordan over the rationals, exact.
    const std::size_t m = op.dim();
    std::vector<RVec> a = op.rows();
    std::vector<RVec> inv = AffineOperator::identity(m).rows();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        while (pivot < m && a[pivot][col].is_zero()) ++pivot;
        if (pivot == m) throw SingularError("operator is singular");
        std::swap(a[pivot], a[col]);
        std::swap(inv[pivot], inv[col]);
        const Rational scale = a[col][col].reciprocal();
        for (std::size_t j = 0; j < m; ++j) {
            a[col][j] *= scale;
            inv[col][j] *= scale;
        }
        for (std::size_t i = 0; i < m; ++i) {
            if (i == col || a[i][col].is_zero()) continue;
            const Rational f = a[i][col];
            for (std::size_t j = 0; j < m; ++j) {
                a[i][j] -= f * a[col][j];
                inv[i][j] -= f * inv[col][j];
            }
        }
    }
    return AffineOperator(std::move(inv));
}

WeightDistribution weight(const AffineState& v) {
    Rational norm;
    for (std::size_t i = 0; i < v.dim(); ++i) norm += v[i].abs();
    WeightDistribution d;
    d.l1_norm = norm;
    d.probabilities.reserve(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) d.probabilities.push_back(v[i].abs() / norm);
    return d;
}

AffineOperator linear_combination_gadget(std::size_t n, const RVec& coefficients) {
    if (coefficients.size() != n) throw DimensionError("gadget needs one coefficient per input");
    const std::size_t m = n + 2;
    std::vector<RVec> rows(m, RVec(m, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) rows[i][i] = Rational(1);  // inputs pass through
    for (std::size_t j = 0; j < n; ++j) {
        rows[n][j] = coefficients[j];       // y' = sum c_j x_j
        rows[n + 1][j] = -coefficients[j];  // balancing row keeps column sums at 1
    }
    rows[n + 1][n] = Rational(1);
    rows[n + 1][n + 1] = Rational(1);
    return AffineOperator(std::move(rows));
}

}  // namespace affam
