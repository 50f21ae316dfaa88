#include "mcot/rational.hpp"

#include "mcot/errors.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>

namespace mcot {

namespace {

using i128 = __int128;

std::int64_t to_i64_checked(i128 v) {
    if (v > i128(INT64_MAX) || v < i128(INT64_MIN)) {
        throw ContractViolation("rational arithmetic overflow");
    }
    return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Reduces in 128-bit so intermediates out of int64 range survive as long as
// the normalized value fits; the int64 constructor then re-normalizes a pair
// that is already coprime.
Rational make_reduced(i128 num, i128 den) {
    if (den == 0) throw DivisionByZero("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    i128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational(to_i64_checked(num), to_i64_checked(den));
}

} // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw DivisionByZero("rational with zero denominator");
    i128 n = num;
    i128 d = den;
    if (d < 0) {
        n = -n;
        d = -d;
    }
    i128 g = gcd128(n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    num_ = to_i64_checked(n);
    den_ = to_i64_checked(d);
}

Rational Rational::operator+(const Rational& o) const {
    return make_reduced(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return make_reduced(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return make_reduced(i128(num_) * o.num_, i128(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_ == 0) throw DivisionByZero("division by zero rational");
    return make_reduced(i128(num_) * o.den_, i128(den_) * o.num_);
}

Rational Rational::operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
}

bool Rational::operator<(const Rational& o) const {
    return i128(num_) * o.den_ < i128(o.num_) * den_;
}

std::string Rational::to_decimal(int places) const {
    if (places < 0) places = 0;
    i128 scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;

    bool negative = num_ < 0;
    i128 n = negative ? -i128(num_) : i128(num_);
    i128 scaled = n * scale;
    i128 q = scaled / den_;
    i128 r = scaled % den_;
    // round half to even on the last kept digit
    i128 twice = r * 2;
    if (twice > den_ || (twice == den_ && (q % 2) == 1)) {
        ++q;
    }

    i128 int_part = q / scale;
    i128 frac_part = q % scale;

    std::string out;
    if (negative && q != 0) out += '-';
    // render int_part
    std::string digits;
    if (int_part == 0) {
        digits = "0";
    } else {
        while (int_part > 0) {
            digits += static_cast<char>('0' + static_cast<int>(int_part % 10));
            int_part /= 10;
        }
        for (std::size_t i = 0, j = digits.size(); i + 1 < j; ++i, --j) {
            std::swap(digits[i], digits[j - 1]);
        }
    }
    out += digits;
    if (places > 0) {
        std::string frac(static_cast<std::size_t>(places), '0');
        for (int i = places - 1; i >= 0 && frac_part > 0; --i) {
            frac[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac_part % 10));
            frac_part /= 10;
        }
        out += '.';
        out += frac;
    }
    return out;
}

Rational Rational::from_decimal(const std::string& text) {
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        negative = text[i] == '-';
        ++i;
    }
    i128 num = 0;
    i128 den = 1;
    bool any_digit = false;
    bool seen_dot = false;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (c == '.') {
            if (seen_dot) throw ParseFailure("malformed decimal: " + text);
            seen_dot = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            throw ParseFailure("malformed decimal: " + text);
        }
        any_digit = true;
        num = num * 10 + (c - '0');
        if (seen_dot) den *= 10;
        if (num > i128(INT64_MAX) / 10 || den > i128(INT64_MAX) * 10) {
            throw ContractViolation("decimal out of range: " + text);
        }
    }
    if (!any_digit) throw ParseFailure("malformed decimal: " + text);
    if (negative) num = -num;
    return make_reduced(num, den);
}

} // namespace mcot
