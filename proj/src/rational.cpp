#include "affam/rational.hpp"

#include <ostream>

namespace affam {

Rational Rational::parse(const std::string& text) {
    if (text.empty()) throw Error("empty rational literal");
    mpq_class q;
    if (q.set_str(text, 10) != 0)
        throw Error("bad rational literal: '" + text + "'");
    if (sgn(q.get_den()) == 0) throw SingularError("rational literal with zero denominator");
    q.canonicalize();
    return Rational(q);
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw SingularError("division by zero");
    v_ /= o.v_;
    return *this;
}

Rational Rational::reciprocal() const {
    if (is_zero()) throw SingularError("reciprocal of zero");
    return Rational(mpq_class(v_.get_den(), v_.get_num()));
}

Rational Rational::pow(long e) const {
    if (e < 0) return reciprocal().pow(-e);
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), v_.get_num().get_mpz_t(), static_cast<unsigned long>(e));
    mpz_pow_ui(den.get_mpz_t(), v_.get_den().get_mpz_t(), static_cast<unsigned long>(e));
    return Rational(num, den);
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

Rational sum(const RVec& v) {
    Rational s;
    for (const auto& x : v) s += x;
    return s;
}

}  // namespace affam
