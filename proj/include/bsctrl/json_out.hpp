#pragma once

// Minimal json emitter for reports. Objects keep insertion order and doubles
// are printed with 17 significant digits, so emitted reports are replayable
// and byte-stable for identical inputs.

#include "bsctrl/types.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bsctrl {

class JsonValue {
public:
    using Object = std::vector<std::pair<std::string, JsonValue>>;
    using Array = std::vector<JsonValue>;

    JsonValue() : v_(nullptr) {}
    JsonValue(std::nullptr_t) : v_(nullptr) {}
    JsonValue(bool b) : v_(b) {}
    JsonValue(int i) : v_(static_cast<long long>(i)) {}
    JsonValue(long long i) : v_(i) {}
    JsonValue(double d) : v_(d) {}
    JsonValue(const char* s) : v_(std::string(s)) {}
    JsonValue(std::string s) : v_(std::move(s)) {}
    JsonValue(Array a) : v_(std::move(a)) {}
    JsonValue(Object o) : v_(std::move(o)) {}

    [[nodiscard]] static JsonValue object() { return JsonValue(Object{}); }
    [[nodiscard]] static JsonValue array() { return JsonValue(Array{}); }

    JsonValue& set(const std::string& key, JsonValue value) {
        std::get<Object>(v_).emplace_back(key, std::move(value));
        return *this;
    }
    JsonValue& push(JsonValue value) {
        std::get<Array>(v_).push_back(std::move(value));
        return *this;
    }

    [[nodiscard]] static JsonValue from_matrix(const Matrix& m) {
        Array rows;
        rows.reserve(static_cast<std::size_t>(m.rows()));
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            Array row;
            row.reserve(static_cast<std::size_t>(m.cols()));
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.emplace_back(m(i, j));
            rows.emplace_back(std::move(row));
        }
        return JsonValue(std::move(rows));
    }

    [[nodiscard]] static JsonValue from_vector(const Vector& v) {
        Array items;
        items.reserve(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) items.emplace_back(v(i));
        return JsonValue(std::move(items));
    }

    void dump(std::string& out, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        const std::string closing(static_cast<std::size_t>(indent) * depth, ' ');
        switch (v_.index()) {
            case 0: out += "null"; break;
            case 1: out += (std::get<bool>(v_) ? "true" : "false"); break;
            case 2: out += std::to_string(std::get<long long>(v_)); break;
            case 3: {
                const double d = std::get<double>(v_);
                if (!std::isfinite(d)) {
                    out += "null";
                } else {
                    char buf[40];
                    std::snprintf(buf, sizeof(buf), "%.17g", d);
                    out += buf;
                }
                break;
            }
            case 4: escape(std::get<std::string>(v_), out); break;
            case 5: {
                const Array& a = std::get<Array>(v_);
                if (a.empty()) { out += "[]"; break; }
                out += "[";
                for (std::size_t i = 0; i < a.size(); ++i) {
                    out += (i == 0 ? "\n" : ",\n");
                    out += pad;
                    a[i].dump(out, indent, depth + 1);
                }
                out += "\n" + closing + "]";
                break;
            }
            case 6: {
                const Object& o = std::get<Object>(v_);
                if (o.empty()) { out += "{}"; break; }
                out += "{";
                for (std::size_t i = 0; i < o.size(); ++i) {
                    out += (i == 0 ? "\n" : ",\n");
                    out += pad;
                    escape(o[i].first, out);
                    out += ": ";
                    o[i].second.dump(out, indent, depth + 1);
                }
                out += "\n" + closing + "}";
                break;
            }
        }
    }

    [[nodiscard]] std::string dump(int indent = 2) const {
        std::string out;
        dump(out, indent, 0);
        out += "\n";
        return out;
    }

private:
    static void escape(const std::string& s, std::string& out) {
        out += '"';
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                case '\r': out += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        out += '"';
    }

    std::variant<std::nullptr_t, bool, long long, double, std::string, Array, Object> v_;
};

}  // namespace bsctrl
