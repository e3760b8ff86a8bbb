#ifndef PPARAB_CONFIG_HPP
#define PPARAB_CONFIG_HPP

#include <map>
#include <string>
#include <string_view>
#include <vector>

/// Minimal structured-text configuration reader: `[section]` tables holding
/// `key = value` pairs with numbers, quoted strings, booleans and flat
/// numeric arrays, `#` comments. The exact schema accepted by the scenario
/// runner is documented in docs/scenario-config.md.
namespace pparab::config {

struct Value {
    enum class Kind { Number, String, Boolean, NumberArray };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string string;
    bool boolean = false;
    std::vector<double> array;

    static Value make_number(double v);
    static Value make_string(std::string v);
    static Value make_boolean(bool v);
    static Value make_array(std::vector<double> v);
};

using Table = std::map<std::string, Value>;

struct Document {
    Table root;                            ///< keys before any [section]
    std::map<std::string, Table> sections;

    bool has(const std::string& section, const std::string& key) const;
    /// Typed getters; throw ConfigError on missing key or wrong kind.
    double number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    long integer(const std::string& section, const std::string& key) const;
    long integer_or(const std::string& section, const std::string& key, long fallback) const;
    std::string text(const std::string& section, const std::string& key) const;
    std::string text_or(const std::string& section, const std::string& key,
                        std::string fallback) const;
    bool boolean_or(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> array(const std::string& section, const std::string& key) const;
};

/// Parse from text; `origin` names the source in error messages.
Document parse_string(std::string_view text, const std::string& origin);

/// Parse a file; throws ConfigError if unreadable or malformed.
Document parse_file(const std::string& path);

/// Parse a single value literal the way file values are parsed.
Value parse_value_literal(std::string_view text, const std::string& origin);

/// Apply a `section.key=value` (or `key=value` for root) override.
void apply_override(Document& doc, const std::string& assignment);

/// Canonical byte rendering (sorted keys) used for config hashing.
std::string canonical_serialize(const Document& doc);

} // namespace pparab::config

#endif
