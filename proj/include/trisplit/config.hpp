#ifndef TRISPLIT_CONFIG_HPP
#define TRISPLIT_CONFIG_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trisplit {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` settings. Blank lines and `#` comments are ignored;
/// later keys override earlier ones.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text, std::string_view source = "<string>");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const { return values_; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace trisplit

#endif
