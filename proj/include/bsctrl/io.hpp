#pragma once

// System files: a single json document with keys n, m, A, B, C (row-major
// arrays of arrays) and an optional label.

#include "bsctrl/reachability.hpp"
#include "bsctrl/types.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <string>

namespace bsctrl {

/// Malformed or inconsistent input; the message carries a field or position
/// diagnostic.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SystemFile {
    BackwardSystem system;
    std::string label;
};

namespace detail {

inline Matrix parse_matrix(const nlohmann::json& j, const std::string& field, int rows, int cols) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows) {
        throw InputError("field '" + field + "': expected " + std::to_string(rows) + " rows");
    }
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            throw InputError("field '" + field + "', row " + std::to_string(i) + ": expected " +
                             std::to_string(cols) + " entries");
        }
        for (int k = 0; k < cols; ++k) {
            const auto& cell = row[static_cast<std::size_t>(k)];
            if (!cell.is_number()) {
                throw InputError("field '" + field + "', row " + std::to_string(i) + ", column " +
                                 std::to_string(k) + ": expected a number");
            }
            out(i, k) = cell.get<double>();
            if (!std::isfinite(out(i, k))) {
                throw InputError("field '" + field + "', row " + std::to_string(i) + ", column " +
                                 std::to_string(k) + ": entry is not finite");
            }
        }
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline SystemFile parse_system_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("json parse error: ") + e.what());
    }
    if (!j.is_object()) throw InputError("top-level json value must be an object");
    for (const char* key : {"n", "m", "A", "B", "C"}) {
        if (!j.contains(key)) throw InputError(std::string("missing required field '") + key + "'");
    }
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 1) {
        throw InputError("field 'n': expected a positive integer");
    }
    if (!j["m"].is_number_integer() || j["m"].get<int>() < 1) {
        throw InputError("field 'm': expected a positive integer");
    }
    const int n = j["n"].get<int>();
    const int m = j["m"].get<int>();

    SystemFile out;
    out.system.A = detail::parse_matrix(j["A"], "A", n, n);
    out.system.B = detail::parse_matrix(j["B"], "B", n, m);
    out.system.C = detail::parse_matrix(j["C"], "C", n, n);
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw InputError("field 'label': expected a string");
        out.label = j["label"].get<std::string>();
    }
    out.system.validate();
    return out;
}

[[nodiscard]] inline SystemFile load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_system_json(text);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    } catch (const DimensionError& e) {
        throw InputError(path + ": " + e.what());
    }
}

}  // namespace bsctrl
