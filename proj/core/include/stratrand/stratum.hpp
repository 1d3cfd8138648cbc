#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace stratrand {

// Joint stratum label: one small integer code per stratification factor.
// Ordered lexicographically so containers keyed by StratumKey iterate in a
// deterministic order.
struct StratumKey {
    std::vector<std::int32_t> codes;

    StratumKey() = default;
    explicit StratumKey(std::vector<std::int32_t> c) : codes(std::move(c)) {}
    StratumKey(std::initializer_list<std::int32_t> c) : codes(c) {}

    int factors() const { return static_cast<int>(codes.size()); }

    friend auto operator<=>(const StratumKey&, const StratumKey&) = default;

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < codes.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(codes[i]);
        }
        return s + ")";
    }
};

// A finite distribution over stratum keys; used by randomizer diagnostics
// that need a stream of strata without caring where it comes from.
struct DiscreteStratumLaw {
    std::vector<StratumKey> keys;
    std::vector<double> probs;   // same length, positive, sums to 1
};

} // namespace stratrand
