#include "cogdep/config.hpp"

#include <fstream>

#include "cogdep/csv.hpp"
#include "cogdep/error.hpp"

namespace cogdep {

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        std::string_view body = csv::trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw InputError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const auto key = csv::trim(body.substr(0, eq));
        const auto value = csv::trim(body.substr(eq + 1));
        if (key.empty()) {
            throw InputError("config line " + std::to_string(line_no) + ": empty key");
        }
        cfg.entries_[std::string(key)] = std::string(value);
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    return parse(in);
}

void KeyValueConfig::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
void KeyValueConfig::set(const std::string& key, double value) { entries_[key] = csv::format_double(value); }
void KeyValueConfig::set(const std::string& key, long long value) { entries_[key] = std::to_string(value); }

bool KeyValueConfig::contains(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto d = csv::parse_double(*v);
    if (!d) throw InputError("config key '" + key + "': not a number: " + *v);
    return *d;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    auto d = csv::parse_int(*v);
    if (!d) throw InputError("config key '" + key + "': not an integer: " + *v);
    return *d;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
    if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
    throw InputError("config key '" + key + "': not a boolean: " + *v);
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
    for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

void KeyValueConfig::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

}  // namespace cogdep
