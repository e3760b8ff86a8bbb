#include "pparab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pparab/csv_io.hpp"
#include "pparab/errors.hpp"

namespace pparab::config {

Value Value::make_number(double v) {
    Value out;
    out.kind = Kind::Number;
    out.number = v;
    return out;
}
Value Value::make_string(std::string v) {
    Value out;
    out.kind = Kind::String;
    out.string = std::move(v);
    return out;
}
Value Value::make_boolean(bool v) {
    Value out;
    out.kind = Kind::Boolean;
    out.boolean = v;
    return out;
}
Value Value::make_array(std::vector<double> v) {
    Value out;
    out.kind = Kind::NumberArray;
    out.array = std::move(v);
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool parse_number(std::string_view s, double& out) {
    const std::string tmp(s);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && !tmp.empty();
}

const Value* find(const Document& doc, const std::string& section, const std::string& key) {
    const Table* table = nullptr;
    if (section.empty()) {
        table = &doc.root;
    } else {
        auto it = doc.sections.find(section);
        if (it == doc.sections.end())
            return nullptr;
        table = &it->second;
    }
    auto kit = table->find(key);
    return kit == table->end() ? nullptr : &kit->second;
}

[[noreturn]] void missing(const std::string& section, const std::string& key) {
    throw ConfigError("missing config key [" + section + "] " + key);
}

} // namespace

bool Document::has(const std::string& section, const std::string& key) const {
    return find(*this, section, key) != nullptr;
}

double Document::number(const std::string& section, const std::string& key) const {
    const Value* v = find(*this, section, key);
    if (!v)
        missing(section, key);
    if (v->kind != Value::Kind::Number)
        throw ConfigError("config key [" + section + "] " + key + " must be a number");
    return v->number;
}

double Document::number_or(const std::string& section, const std::string& key,
                           double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

long Document::integer(const std::string& section, const std::string& key) const {
    const double v = number(section, key);
    const long n = static_cast<long>(std::llround(v));
    if (static_cast<double>(n) != v)
        throw ConfigError("config key [" + section + "] " + key + " must be an integer");
    return n;
}

long Document::integer_or(const std::string& section, const std::string& key,
                          long fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
}

std::string Document::text(const std::string& section, const std::string& key) const {
    const Value* v = find(*this, section, key);
    if (!v)
        missing(section, key);
    if (v->kind != Value::Kind::String)
        throw ConfigError("config key [" + section + "] " + key + " must be a string");
    return v->string;
}

std::string Document::text_or(const std::string& section, const std::string& key,
                              std::string fallback) const {
    return has(section, key) ? text(section, key) : std::move(fallback);
}

bool Document::boolean_or(const std::string& section, const std::string& key,
                          bool fallback) const {
    const Value* v = find(*this, section, key);
    if (!v)
        return fallback;
    if (v->kind != Value::Kind::Boolean)
        throw ConfigError("config key [" + section + "] " + key + " must be a boolean");
    return v->boolean;
}

std::vector<double> Document::array(const std::string& section, const std::string& key) const {
    const Value* v = find(*this, section, key);
    if (!v)
        missing(section, key);
    if (v->kind == Value::Kind::Number)
        return {v->number}; // a scalar is accepted as a one-element list
    if (v->kind != Value::Kind::NumberArray)
        throw ConfigError("config key [" + section + "] " + key + " must be an array");
    return v->array;
}

Value parse_value_literal(std::string_view text, const std::string& origin) {
    text = trim(text);
    if (text.empty())
        throw ConfigError(origin + ": empty value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ConfigError(origin + ": unterminated string");
        return Value::make_string(std::string(text.substr(1, text.size() - 2)));
    }
    if (text == "true")
        return Value::make_boolean(true);
    if (text == "false")
        return Value::make_boolean(false);
    if (text.front() == '[') {
        if (text.back() != ']')
            throw ConfigError(origin + ": unterminated array");
        std::vector<double> items;
        std::string_view body = text.substr(1, text.size() - 2);
        while (true) {
            const std::size_t comma = body.find(',');
            const std::string_view piece = trim(body.substr(0, comma));
            if (!piece.empty()) {
                double v;
                if (!parse_number(piece, v))
                    throw ConfigError(origin + ": bad array element '" + std::string(piece) + "'");
                items.push_back(v);
            } else if (comma != std::string_view::npos) {
                throw ConfigError(origin + ": empty array element");
            }
            if (comma == std::string_view::npos)
                break;
            body.remove_prefix(comma + 1);
        }
        return Value::make_array(std::move(items));
    }
    double v;
    if (!parse_number(text, v))
        throw ConfigError(origin + ": cannot parse value '" + std::string(text) + "'");
    return Value::make_number(v);
}

Document parse_string(std::string_view text, const std::string& origin) {
    Document doc;
    Table* current = &doc.root;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        // strip comments outside quotes
        bool in_quote = false;
        std::size_t cut = line.size();
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                in_quote = !in_quote;
            else if (line[i] == '#' && !in_quote) {
                cut = i;
                break;
            }
        }
        line = trim(line.substr(0, cut));
        if (line.empty())
            continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError(where + ": malformed section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name.empty())
                throw ConfigError(where + ": empty section name");
            current = &doc.sections[name];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty())
            throw ConfigError(where + ": empty key");
        (*current)[key] = parse_value_literal(line.substr(eq + 1), where);
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

void apply_override(Document& doc, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like section.key=value: " + assignment);
    std::string path = std::string(trim(std::string_view(assignment).substr(0, eq)));
    const Value value =
        parse_value_literal(std::string_view(assignment).substr(eq + 1), "override");
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos) {
        doc.root[path] = value;
    } else {
        const std::string section = path.substr(0, dot);
        const std::string key = path.substr(dot + 1);
        if (section.empty() || key.empty())
            throw ConfigError("bad override path: " + path);
        doc.sections[section][key] = value;
    }
}

std::string canonical_serialize(const Document& doc) {
    std::ostringstream out;
    auto emit_value = [&out](const Value& v) {
        switch (v.kind) {
        case Value::Kind::Number:
            out << io::format_double(v.number);
            break;
        case Value::Kind::String:
            out << '"' << v.string << '"';
            break;
        case Value::Kind::Boolean:
            out << (v.boolean ? "true" : "false");
            break;
        case Value::Kind::NumberArray:
            out << '[';
            for (std::size_t i = 0; i < v.array.size(); ++i) {
                if (i)
                    out << ',';
                out << io::format_double(v.array[i]);
            }
            out << ']';
            break;
        }
    };
    for (const auto& [key, value] : doc.root) {
        out << key << '=';
        emit_value(value);
        out << '\n';
    }
    for (const auto& [name, table] : doc.sections) {
        out << '[' << name << "]\n";
        for (const auto& [key, value] : table) {
            out << key << '=';
            emit_value(value);
            out << '\n';
        }
    }
    return out.str();
}

} // namespace pparab::config
