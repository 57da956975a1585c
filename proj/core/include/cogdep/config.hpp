#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

namespace cogdep {

// Line-oriented key=value text. '#' starts a comment; blank lines are ignored;
// later assignments override earlier ones. Keys are kept sorted so that
// serialization is canonical.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in);
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, std::string value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);

    bool contains(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Copies every entry of other into this, overriding existing keys.
    void merge(const KeyValueConfig& other);

    const std::map<std::string, std::string>& entries() const { return entries_; }

    void write(std::ostream& out) const;

private:
    std::map<std::string, std::string> entries_;
};

}  // namespace cogdep
