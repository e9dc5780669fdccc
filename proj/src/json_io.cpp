#include "qmm/json_io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace qmm {

JsonValue JsonValue::array() {
    JsonValue v;
    v.type_ = Type::Array;
    return v;
}

JsonValue JsonValue::object() {
    JsonValue v;
    v.type_ = Type::Object;
    return v;
}

void JsonValue::push_back(JsonValue value) {
    if (type_ != Type::Array) throw std::logic_error("JsonValue: push_back on a non-array");
    items_.push_back(std::move(value));
}

JsonValue& JsonValue::operator[](const std::string& key) {
    if (type_ != Type::Object) throw std::logic_error("JsonValue: key access on a non-object");
    for (auto& member : members_)
        if (member.first == key) return member.second;
    members_.emplace_back(key, JsonValue());
    return members_.back().second;
}

std::size_t JsonValue::size() const {
    if (type_ == Type::Array) return items_.size();
    if (type_ == Type::Object) return members_.size();
    return 0;
}

std::string json_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

void escape_to(std::string& out, const std::string& s) {
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
                    char buffer[8];
                    std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
                    out += buffer;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void newline_indent(std::string& out, int indent, int depth) {
    out += '\n';
    out.append(size_t(indent) * depth, ' ');
}

}  // namespace

void JsonValue::write(std::string& out, int indent, int depth) const {
    switch (type_) {
        case Type::Null: out += "null"; return;
        case Type::Bool: out += bool_ ? "true" : "false"; return;
        case Type::Int: out += std::to_string(int_); return;
        case Type::UInt: out += std::to_string(uint_); return;
        case Type::Double: out += json_number(double_); return;
        case Type::String: escape_to(out, string_); return;
        case Type::Array: {
            if (items_.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            for (std::size_t t = 0; t < items_.size(); ++t) {
                if (t) out += ',';
                newline_indent(out, indent, depth + 1);
                items_[t].write(out, indent, depth + 1);
            }
            newline_indent(out, indent, depth);
            out += ']';
            return;
        }
        case Type::Object: {
            if (members_.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            for (std::size_t t = 0; t < members_.size(); ++t) {
                if (t) out += ',';
                newline_indent(out, indent, depth + 1);
                escape_to(out, members_[t].first);
                out += ": ";
                members_[t].second.write(out, indent, depth + 1);
            }
            newline_indent(out, indent, depth);
            out += '}';
            return;
        }
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    write(out, indent, 0);
    out += '\n';
    return out;
}

JsonValue latin_to_json(const LatinSquare& square) {
    JsonValue rows = JsonValue::array();
    for (int i = 0; i < square.n(); ++i) {
        JsonValue row = JsonValue::array();
        for (int j = 0; j < square.n(); ++j) row.push_back(square.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

LatinSquare latin_from_json(const std::string& text) {
    nlohmann::json parsed = nlohmann::json::parse(text);
    if (!parsed.is_array() || parsed.empty())
        throw std::invalid_argument("latin_from_json: expected a nonempty array of rows");
    const int n = int(parsed.size());
    std::vector<int> entries;
    entries.reserve(size_t(n) * n);
    for (const auto& row : parsed) {
        if (!row.is_array() || int(row.size()) != n)
            throw std::invalid_argument("latin_from_json: rows must all have length n");
        for (const auto& cell : row) {
            if (!cell.is_number_integer())
                throw std::invalid_argument("latin_from_json: entries must be integers");
            entries.push_back(cell.get<int>());
        }
    }
    return LatinSquare(n, entries);
}

JsonValue block_matrix_to_json(const BlockMatrix& u, const std::string& type_tag) {
    JsonValue out = JsonValue::object();
    out["type"] = type_tag;
    out["n"] = u.n();
    out["k"] = u.k();
    JsonValue entries = JsonValue::array();
    for (int i = 0; i < u.n(); ++i) {
        JsonValue row = JsonValue::array();
        for (int j = 0; j < u.n(); ++j) {
            const CMatrix& block = u.block(i, j);
            JsonValue block_rows = JsonValue::array();
            for (int r = 0; r < u.k(); ++r) {
                JsonValue block_row = JsonValue::array();
                for (int c = 0; c < u.k(); ++c) {
                    JsonValue pair = JsonValue::array();
                    pair.push_back(block(r, c).real());
                    pair.push_back(block(r, c).imag());
                    block_row.push_back(std::move(pair));
                }
                block_rows.push_back(std::move(block_row));
            }
            row.push_back(std::move(block_rows));
        }
        entries.push_back(std::move(row));
    }
    out["entries"] = std::move(entries);
    return out;
}

BlockMatrix block_matrix_from_json(const std::string& text) {
    nlohmann::json parsed = nlohmann::json::parse(text);
    // accept a full evaluate report by unwrapping its evaluation field
    if (parsed.is_object() && parsed.contains("evaluation") && !parsed.contains("entries"))
        parsed = parsed["evaluation"];
    if (!parsed.is_object() || !parsed.contains("n") || !parsed.contains("k") ||
        !parsed.contains("entries"))
        throw std::invalid_argument("block_matrix_from_json: expected {type, n, k, entries}");
    const int n = parsed["n"].get<int>();
    const int k = parsed["k"].get<int>();
    if (n < 1 || k < 1)
        throw std::invalid_argument("block_matrix_from_json: n and k must be >= 1");
    const auto& entries = parsed["entries"];
    if (!entries.is_array() || int(entries.size()) != n)
        throw std::invalid_argument("block_matrix_from_json: entries must be an n x n array");
    BlockMatrix out(n, k);
    for (int i = 0; i < n; ++i) {
        const auto& row = entries[size_t(i)];
        if (!row.is_array() || int(row.size()) != n)
            throw std::invalid_argument("block_matrix_from_json: entries must be an n x n array");
        for (int j = 0; j < n; ++j) {
            const auto& block_rows = row[size_t(j)];
            if (!block_rows.is_array() || int(block_rows.size()) != k)
                throw std::invalid_argument("block_matrix_from_json: blocks must be k x k");
            CMatrix& block = out.block(i, j);
            for (int r = 0; r < k; ++r) {
                const auto& block_row = block_rows[size_t(r)];
                if (!block_row.is_array() || int(block_row.size()) != k)
                    throw std::invalid_argument("block_matrix_from_json: blocks must be k x k");
                for (int c = 0; c < k; ++c) {
                    const auto& pair = block_row[size_t(c)];
                    if (!pair.is_array() || pair.size() != 2)
                        throw std::invalid_argument(
                            "block_matrix_from_json: entries are [re, im] pairs");
                    block(r, c) = Complex(pair[0].get<double>(), pair[1].get<double>());
                }
            }
        }
    }
    return out;
}

}  // namespace qmm
