#pragma once

#include <cstdint>
#include <string>

namespace mcot {

/// Exact rational number backed by int64 numerator/denominator.
///
/// Scores and deltas are kept as rationals end to end so identities like
/// C^(k) = C^(k-1) + delta_k hold bit-exactly; decimal text is produced only
/// at report time. Always stored normalized: den > 0, gcd(|num|, den) == 1.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t value) : num_(value), den_(1) {}
    Rational(std::int64_t num, std::int64_t den);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const;

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }

    bool operator==(const Rational& o) const = default;
    bool operator<(const Rational& o) const;
    bool operator<=(const Rational& o) const { return *this == o || *this < o; }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return o <= *this; }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// Fixed-point decimal rendering with round-half-even at `places` digits.
    std::string to_decimal(int places = 2) const;

    /// Parses "3", "-0.25", "8.974" into an exact rational.
    static Rational from_decimal(const std::string& text);

private:
    std::int64_t num_;
    std::int64_t den_;
};

} // namespace mcot
