#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stratrand/rational.hpp"

namespace stratrand {

// Target allocation pi_1..pi_k over k >= 2 arms, stored exactly.
// Arms are 1-based everywhere in this library.
class AllocationSpec {
public:
    // From exact proportions; throws ConfigError unless k >= 2, every
    // 0 < pi_t < 1, and sum(pi) == 1 exactly.
    explicit AllocationSpec(std::vector<Rational> pi);

    // From integer ratio parts, e.g. {1,2,2} for 1:2:2.
    static AllocationSpec from_ratio(const std::vector<std::int64_t>& parts);

    // Parses "1:2:2", "0.2,0.4,0.4" or "1/5,2/5,2/5".
    static AllocationSpec parse(const std::string& text);

    int k() const { return static_cast<int>(pi_.size()); }
    const Rational& pi(int arm) const { return pi_.at(arm - 1); }          // 1-based
    double pi_value(int arm) const { return pi_.at(arm - 1).value(); }
    std::vector<double> pi_values() const;

    // Smallest integer vector proportional to pi, e.g. (1,2,2) for 1:2:2.
    const std::vector<std::int64_t>& integer_parts() const { return parts_; }
    std::int64_t parts_sum() const { return parts_sum_; }

    // True when the allocation is uniform 1:1:...:1.
    bool balanced() const;

    // A permuted block of this size holds exactly block_size * pi_t slots
    // per arm; throws ConfigError unless block_size is a positive multiple
    // of parts_sum().
    void validate_block_size(int block_size) const;

    std::string str() const;   // "1:2:2" style

private:
    std::vector<Rational> pi_;
    std::vector<std::int64_t> parts_;
    std::int64_t parts_sum_ = 0;
};

} // namespace stratrand
