#pragma once

// Sectioned key/value run configuration: defaults, then an INI file, then command-line flags.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cradle::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KeyType { real, integer, text, list, boolean };

struct KeyDef {
    std::string key;  ///< "section.name"
    KeyType type;
    std::string fallback;
    std::string help;
};

/// Every recognised key with its default value.
const std::vector<KeyDef>& known_keys();

class Config {
public:
    Config();

    /// Reads an INI file; unknown sections or keys are errors anchored to their line.
    void load_file(const std::string& path);
    /// Overrides a key from a command-line flag.
    void set_flag(const std::string& key, const std::string& flag, const std::string& value);

    [[nodiscard]] double real(const std::string& key) const;
    [[nodiscard]] long long integer(const std::string& key) const;
    [[nodiscard]] std::size_t count(const std::string& key) const;  ///< non-negative integer
    [[nodiscard]] std::string text(const std::string& key) const;
    [[nodiscard]] std::vector<double> list(const std::string& key) const;
    [[nodiscard]] bool boolean(const std::string& key) const;

    /// All keys, typed, grouped by section.
    [[nodiscard]] nlohmann::ordered_json to_json() const;

private:
    struct Entry {
        std::string value;
        std::string origin;  ///< "default", "PATH:LINE" or "--flag"
        KeyType type = KeyType::text;
    };

    const Entry& entry(const std::string& key) const;
    [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& what) const;

    std::map<std::string, Entry> entries_;
};

/// Strict decimal parse, "inf" accepted; false on failure.
bool parse_real(std::string_view s, double& out);

}  // namespace cradle::cli
