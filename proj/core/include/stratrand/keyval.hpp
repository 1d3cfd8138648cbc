#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace stratrand {

// Flat key = value configuration with '#' comments. Values from later set()
// calls (command-line flags) override file entries. Typed getters throw
// ConfigError with the key name on parse failures; accesses are tracked so
// commands can warn about unrecognized keys.
class KeyVal {
public:
    KeyVal() = default;
    static KeyVal from_file(const std::string& path);
    static KeyVal from_text(const std::string& text, const std::string& what);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get(const std::string& key, const std::string& def = "") const;
    std::string require(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t def) const;
    std::int64_t require_int(const std::string& key) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;

    // Comma-separated list, items trimmed; empty when absent.
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<std::string> require_list(const std::string& key) const;

    // Keys never read by any getter (likely typos).
    std::vector<std::string> unused_keys() const;

private:
    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> touched_;
};

// Trims ASCII whitespace at both ends.
std::string trim(const std::string& s);

} // namespace stratrand
