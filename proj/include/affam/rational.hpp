#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "affam/errors.hpp"

namespace affam {

// Exact rational scalar. Thin value wrapper around GMP's mpq_class that keeps
// every value canonical (lowest terms, positive denominator) and serializes
// as a fraction string. No floating point is involved anywhere in arithmetic;
// to_double() exists for display only.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}
    Rational(long n, long d) : v_(n, d) { require_nonzero_den(); v_.canonicalize(); }
    explicit Rational(const mpz_class& n) : v_(n) {}
    Rational(const mpz_class& n, const mpz_class& d) : v_(n, d) { require_nonzero_den(); v_.canonicalize(); }
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    // Parses "p", "p/q" or "-p/q" (arbitrary precision, base 10).
    static Rational parse(const std::string& text);

    const mpz_class& numerator() const { return v_.get_num(); }
    const mpz_class& denominator() const { return v_.get_den(); }
    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    int sign() const { return sgn(v_); }

    Rational operator-() const { return Rational(mpq_class(-v_)); }
    Rational abs() const { return sign() < 0 ? -*this : *this; }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { a += b; return a; }
    friend Rational operator-(Rational a, const Rational& b) { a -= b; return a; }
    friend Rational operator*(Rational a, const Rational& b) { a *= b; return a; }
    friend Rational operator/(Rational a, const Rational& b) { a /= b; return a; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    Rational reciprocal() const;

    // Integer exponent; negative exponents invert (throws SingularError on 0).
    Rational pow(long e) const;

    // Canonical fraction string: "2/3", "-7", "0".
    std::string str() const { return v_.get_str(); }
    double to_double() const { return v_.get_d(); }

    const mpq_class& raw() const { return v_; }

private:
    void require_nonzero_den() {
        if (sgn(v_.get_den()) == 0) throw SingularError("rational with zero denominator");
    }
    mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

using RVec = std::vector<Rational>;

Rational sum(const RVec& v);

}  // namespace affam
