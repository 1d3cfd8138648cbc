#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "stratrand/errors.hpp"

namespace stratrand {

// Exact nonnegative rational, always kept in lowest terms with den > 0.
// Used for allocation proportions so that "proportions sum to one" is an
// exact statement, not a floating-point one.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den == 0) throw ConfigError("rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        reduce();
    }

    void reduce() {
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }

    std::string str() const {
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

} // namespace stratrand
