#include "stratrand/allocation.hpp"

#include <numeric>
#include <sstream>

namespace stratrand {

AllocationSpec::AllocationSpec(std::vector<Rational> pi) : pi_(std::move(pi)) {
    if (pi_.size() < 2) throw ConfigError("allocation needs at least 2 arms");
    Rational sum(0, 1);
    for (const auto& p : pi_) {
        if (p.num <= 0 || p.num >= p.den)
            throw ConfigError("allocation proportion " + p.str() + " outside (0,1)");
        sum = sum + p;
    }
    if (!(sum == Rational(1, 1)))
        throw ConfigError("allocation proportions sum to " + sum.str() + ", not 1");

    // pi_t = a_t / S with S = lcm of denominators; integer parts are a_t
    // divided by their common gcd.
    std::int64_t L = 1;
    for (const auto& p : pi_) L = std::lcm(L, p.den);
    parts_.reserve(pi_.size());
    for (const auto& p : pi_) parts_.push_back(p.num * (L / p.den));
    std::int64_t g = 0;
    for (auto a : parts_) g = std::gcd(g, a);
    for (auto& a : parts_) a /= g;
    parts_sum_ = std::accumulate(parts_.begin(), parts_.end(), std::int64_t{0});
}

AllocationSpec AllocationSpec::from_ratio(const std::vector<std::int64_t>& parts) {
    if (parts.size() < 2) throw ConfigError("allocation ratio needs at least 2 parts");
    std::int64_t sum = 0;
    for (auto a : parts) {
        if (a <= 0) throw ConfigError("allocation ratio parts must be positive");
        sum += a;
    }
    std::vector<Rational> pi;
    pi.reserve(parts.size());
    for (auto a : parts) pi.emplace_back(a, sum);
    return AllocationSpec(std::move(pi));
}

namespace {

Rational parse_proportion(const std::string& tok) {
    const auto slash = tok.find('/');
    if (slash != std::string::npos) {
        return Rational(std::stoll(tok.substr(0, slash)), std::stoll(tok.substr(slash + 1)));
    }
    const auto dot = tok.find('.');
    if (dot != std::string::npos) {
        // Exact decimal: digits after the dot over a power of ten.
        const std::string whole = tok.substr(0, dot);
        const std::string frac = tok.substr(dot + 1);
        if (frac.empty() || frac.size() > 15)
            throw ConfigError("cannot parse proportion '" + tok + "'");
        std::int64_t den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        const std::int64_t w = whole.empty() ? 0 : std::stoll(whole);
        return Rational(w * den + std::stoll(frac), den);
    }
    return Rational(std::stoll(tok), 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) { out.push_back(cur); cur.clear(); }
        else if (!std::isspace(static_cast<unsigned char>(c))) cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

} // namespace

AllocationSpec AllocationSpec::parse(const std::string& text) {
    try {
        if (text.find(':') != std::string::npos) {
            std::vector<std::int64_t> parts;
            for (const auto& tok : split(text, ':')) parts.push_back(std::stoll(tok));
            return from_ratio(parts);
        }
        std::vector<Rational> pi;
        for (const auto& tok : split(text, ',')) pi.push_back(parse_proportion(tok));
        return AllocationSpec(std::move(pi));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse allocation '" + text + "'");
    }
}

std::vector<double> AllocationSpec::pi_values() const {
    std::vector<double> v;
    v.reserve(pi_.size());
    for (const auto& p : pi_) v.push_back(p.value());
    return v;
}

bool AllocationSpec::balanced() const {
    for (auto a : parts_)
        if (a != 1) return false;
    return true;
}

void AllocationSpec::validate_block_size(int block_size) const {
    if (block_size <= 0 || block_size % parts_sum_ != 0)
        throw ConfigError("block size " + std::to_string(block_size) +
                          " is not a positive multiple of " + std::to_string(parts_sum_) +
                          " (allocation " + str() + ")");
}

std::string AllocationSpec::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) os << ':';
        os << parts_[i];
    }
    return os.str();
}

} // namespace stratrand
