#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>

#include "crowdgraph/errors.hpp"

namespace crowdgraph {

/// Exact non-negative fraction, always stored in lowest terms.
class Rational {
public:
    constexpr Rational() = default;

    Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
        detail::require(den != 0, "Rational: zero denominator");
        const auto g = std::gcd(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    constexpr std::uint64_t num() const noexcept { return num_; }
    constexpr std::uint64_t den() const noexcept { return den_; }
    double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend bool operator==(const Rational&, const Rational&) = default;

    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<unsigned __int128>(a.num_) * b.den_ <
               static_cast<unsigned __int128>(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.num_ << '/' << r.den_;
    }

private:
    std::uint64_t num_ = 0;
    std::uint64_t den_ = 1;
};

}  // namespace crowdgraph
