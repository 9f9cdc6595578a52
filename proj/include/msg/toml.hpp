#ifndef MSG_TOML_HPP
#define MSG_TOML_HPP

// Minimal TOML reader covering the subset used by this project's file
// formats: bare keys, strings, ints, floats, booleans, (nested, possibly
// multi-line) arrays, [tables] and [[arrays of tables]] with dotted names.

#include <cctype>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>
#include <fstream>
#include <sstream>

namespace msg::toml {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Value;
using Array = std::vector<Value>;

class Value {
public:
    Value() : data_(std::int64_t{0}) {}
    explicit Value(std::string s) : data_(std::move(s)) {}
    explicit Value(std::int64_t i) : data_(i) {}
    explicit Value(double d) : data_(d) {}
    explicit Value(bool b) : data_(b) {}
    explicit Value(Array a) : data_(std::move(a)) {}

    bool is_string() const { return std::holds_alternative<std::string>(data_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
    bool is_float() const { return std::holds_alternative<double>(data_); }
    bool is_bool() const { return std::holds_alternative<bool>(data_); }
    bool is_array() const { return std::holds_alternative<Array>(data_); }

    const std::string& as_string() const { return expect<std::string>("string"); }
    std::int64_t as_int() const { return expect<std::int64_t>("integer"); }
    bool as_bool() const { return expect<bool>("boolean"); }
    const Array& as_array() const { return expect<Array>("array"); }

    // ints promote to double
    double as_double() const {
        if (is_int()) return static_cast<double>(std::get<std::int64_t>(data_));
        return expect<double>("float");
    }

    std::vector<double> as_double_array() const {
        const Array& a = as_array();
        std::vector<double> out;
        out.reserve(a.size());
        for (const Value& v : a) out.push_back(v.as_double());
        return out;
    }

private:
    template <class T>
    const T& expect(const char* what) const {
        if (!std::holds_alternative<T>(data_))
            throw ParseError(std::string("TOML value is not a ") + what);
        return std::get<T>(data_);
    }
    std::variant<std::string, std::int64_t, double, bool, Array> data_;
};

class Table {
public:
    bool contains(const std::string& key) const { return values_.count(key) > 0; }
    bool has_table(const std::string& key) const { return tables_.count(key) > 0; }
    bool has_table_array(const std::string& key) const { return table_arrays_.count(key) > 0; }

    const Value& at(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ParseError("missing TOML key: " + key);
        return it->second;
    }
    const Table& table(const std::string& key) const {
        auto it = tables_.find(key);
        if (it == tables_.end()) throw ParseError("missing TOML table: " + key);
        return it->second;
    }
    const std::vector<Table>& table_array(const std::string& key) const {
        auto it = table_arrays_.find(key);
        if (it == table_arrays_.end()) throw ParseError("missing TOML table array: " + key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        return contains(key) ? at(key).as_string() : dflt;
    }
    double get_double(const std::string& key, double dflt) const {
        return contains(key) ? at(key).as_double() : dflt;
    }
    std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
        return contains(key) ? at(key).as_int() : dflt;
    }
    bool get_bool(const std::string& key, bool dflt) const {
        return contains(key) ? at(key).as_bool() : dflt;
    }

    void set(const std::string& key, Value v) { values_[key] = std::move(v); }
    Table& subtable(const std::string& key) { return tables_[key]; }
    Table& append_to_array(const std::string& key) {
        table_arrays_[key].emplace_back();
        return table_arrays_[key].back();
    }

private:
    std::map<std::string, Value> values_;
    std::map<std::string, Table> tables_;
    std::map<std::string, std::vector<Table>> table_arrays_;
};

namespace detail {

inline std::string strip(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// removes a trailing comment, respecting quoted strings
inline std::string strip_comment(std::string_view line) {
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
        if (c == '#' && !in_str) return std::string(line.substr(0, i));
    }
    return std::string(line);
}

inline int bracket_balance(std::string_view s) {
    bool in_str = false;
    int bal = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        if (in_str) continue;
        if (c == '[') ++bal;
        if (c == ']') --bal;
    }
    return bal;
}

inline std::string unescape(std::string_view raw, int line_no) {
    std::string out;
    for (size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != '\\') {
            out.push_back(raw[i]);
            continue;
        }
        if (++i >= raw.size()) throw ParseError("dangling escape on line " + std::to_string(line_no));
        switch (raw[i]) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            default: throw ParseError("unsupported escape on line " + std::to_string(line_no));
        }
    }
    return out;
}

Value parse_value(std::string_view text, int line_no);

inline Array parse_array(std::string_view inner, int line_no) {
    Array out;
    bool in_str = false;
    int depth = 0;
    size_t start = 0;
    auto flush = [&](size_t end) {
        std::string piece = strip(inner.substr(start, end - start));
        if (!piece.empty()) out.push_back(parse_value(piece, line_no));
    };
    for (size_t i = 0; i < inner.size(); ++i) {
        char c = inner[i];
        if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_str = !in_str;
        if (in_str) continue;
        if (c == '[') ++depth;
        if (c == ']') --depth;
        if (c == ',' && depth == 0) {
            flush(i);
            start = i + 1;
        }
    }
    flush(inner.size());
    return out;
}

inline Value parse_value(std::string_view text, int line_no) {
    std::string t = strip(text);
    if (t.empty()) throw ParseError("empty TOML value on line " + std::to_string(line_no));
    if (t.front() == '"') {
        if (t.size() < 2 || t.back() != '"')
            throw ParseError("unterminated string on line " + std::to_string(line_no));
        return Value(unescape(std::string_view(t).substr(1, t.size() - 2), line_no));
    }
    if (t.front() == '[') {
        if (t.back() != ']')
            throw ParseError("unterminated array on line " + std::to_string(line_no));
        return Value(parse_array(std::string_view(t).substr(1, t.size() - 2), line_no));
    }
    if (t == "true") return Value(true);
    if (t == "false") return Value(false);

    const bool looks_float = t.find_first_of(".eE") != std::string::npos ||
                             t.find("inf") != std::string::npos || t.find("nan") != std::string::npos;
    try {
        if (!looks_float) {
            size_t used = 0;
            std::int64_t i = std::stoll(t, &used);
            if (used == t.size()) return Value(i);
        }
        size_t used = 0;
        double d = std::stod(t, &used);
        if (used != t.size())
            throw ParseError("malformed number '" + t + "' on line " + std::to_string(line_no));
        return Value(d);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError("malformed value '" + t + "' on line " + std::to_string(line_no));
    }
}

inline std::vector<std::string> split_dotted(const std::string& name, int line_no) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : name) {
        if (c == '.') {
            if (cur.empty()) throw ParseError("empty table-name part on line " + std::to_string(line_no));
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (cur.empty()) throw ParseError("empty table-name part on line " + std::to_string(line_no));
    parts.push_back(cur);
    return parts;
}

} // namespace detail

inline Table parse(std::string_view text) {
    Table root;
    Table* current = &root;

    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur.push_back(c);
            }
        }
        lines.push_back(cur);
    }

    for (size_t li = 0; li < lines.size(); ++li) {
        int line_no = static_cast<int>(li) + 1;
        std::string line = detail::strip(detail::strip_comment(lines[li]));
        if (line.empty()) continue;

        if (line.front() == '[') {
            bool is_array = line.size() > 1 && line[1] == '[';
            std::string close = is_array ? "]]" : "]";
            if (line.substr(line.size() - close.size()) != close)
                throw ParseError("malformed table header on line " + std::to_string(line_no));
            std::string name = detail::strip(line.substr(is_array ? 2 : 1,
                                                         line.size() - 2 * (is_array ? 2 : 1)));
            auto parts = detail::split_dotted(name, line_no);
            Table* t = &root;
            for (size_t i = 0; i + 1 < parts.size(); ++i) t = &t->subtable(parts[i]);
            current = is_array ? &t->append_to_array(parts.back()) : &t->subtable(parts.back());
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value' on line " + std::to_string(line_no));
        std::string key = detail::strip(std::string_view(line).substr(0, eq));
        std::string value = detail::strip(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ParseError("empty key on line " + std::to_string(line_no));

        // multi-line array: keep consuming lines until brackets balance
        int bal = detail::bracket_balance(value);
        while (bal > 0 && li + 1 < lines.size()) {
            ++li;
            std::string more = detail::strip_comment(lines[li]);
            value += ' ';
            value += detail::strip(more);
            bal = detail::bracket_balance(value);
        }
        if (bal != 0) throw ParseError("unbalanced brackets starting on line " + std::to_string(line_no));

        current->set(key, detail::parse_value(value, line_no));
    }
    return root;
}

inline Table parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

} // namespace msg::toml

#endif // MSG_TOML_HPP
