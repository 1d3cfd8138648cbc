#include "stratrand/keyval.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "stratrand/errors.hpp"

namespace stratrand {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

KeyVal KeyVal::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path);
}

KeyVal KeyVal::from_text(const std::string& text, const std::string& what) {
    KeyVal kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(what + " line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError(what + " line " + std::to_string(lineno) + ": empty key");
        kv.entries_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void KeyVal::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

bool KeyVal::has(const std::string& key) const {
    touched_.insert(key);
    return entries_.count(key) > 0;
}

std::string KeyVal::get(const std::string& key, const std::string& def) const {
    touched_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? def : it->second;
}

std::string KeyVal::require(const std::string& key) const {
    touched_.insert(key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required config key '" + key + "'");
    return it->second;
}

namespace {

std::int64_t to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::int64_t x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trail");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse integer from '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trail");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number from '" + v + "'");
    }
}

} // namespace

std::int64_t KeyVal::get_int(const std::string& key, std::int64_t def) const {
    return has(key) ? to_int(key, get(key)) : def;
}

std::int64_t KeyVal::require_int(const std::string& key) const {
    return to_int(key, require(key));
}

double KeyVal::get_double(const std::string& key, double def) const {
    return has(key) ? to_double(key, get(key)) : def;
}

bool KeyVal::get_bool(const std::string& key, bool def) const {
    if (!has(key)) return def;
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': cannot parse boolean from '" + v + "'");
}

std::uint64_t KeyVal::get_u64(const std::string& key, std::uint64_t def) const {
    if (!has(key)) return def;
    const std::string v = get(key);
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trail");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse unsigned integer from '" + v + "'");
    }
}

std::vector<std::string> KeyVal::get_list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const std::string v = get(key);
    std::string cur;
    for (char c : v) {
        if (c == ',') { out.push_back(trim(cur)); cur.clear(); }
        else cur.push_back(c);
    }
    cur = trim(cur);
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    for (const auto& item : out)
        if (item.empty()) throw ConfigError("key '" + key + "': empty list item in '" + v + "'");
    return out;
}

std::vector<std::string> KeyVal::require_list(const std::string& key) const {
    require(key);
    return get_list(key);
}

std::vector<std::string> KeyVal::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (!touched_.count(k)) out.push_back(k);
    return out;
}

} // namespace stratrand
