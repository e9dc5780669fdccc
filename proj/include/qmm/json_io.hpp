#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmm/linalg.hpp"
#include "qmm/magic.hpp"

namespace qmm {

/// JSON value that preserves object-key insertion order and serializes
/// doubles with 17 significant digits, so a fixed configuration always
/// produces a byte-identical report.
class JsonValue {
public:
    enum class Type { Null, Bool, Int, UInt, Double, String, Array, Object };

    JsonValue() = default;
    JsonValue(bool value) : type_(Type::Bool), bool_(value) {}
    JsonValue(int value) : type_(Type::Int), int_(value) {}
    JsonValue(long long value) : type_(Type::Int), int_(value) {}
    JsonValue(std::uint64_t value) : type_(Type::UInt), uint_(value) {}
    JsonValue(double value) : type_(Type::Double), double_(value) {}
    JsonValue(const char* value) : type_(Type::String), string_(value) {}
    JsonValue(std::string value) : type_(Type::String), string_(std::move(value)) {}

    static JsonValue array();
    static JsonValue object();

    Type type() const { return type_; }
    bool is_object() const { return type_ == Type::Object; }
    bool is_array() const { return type_ == Type::Array; }

    /// Array append. Throws unless this value was made by array().
    void push_back(JsonValue value);

    /// Object access by key: inserts a null on first use, keeps insertion
    /// order. Throws unless this value was made by object().
    JsonValue& operator[](const std::string& key);

    std::size_t size() const;

    std::string dump(int indent = 2) const;

private:
    void write(std::string& out, int indent, int depth) const;

    Type type_ = Type::Null;
    bool bool_ = false;
    long long int_ = 0;
    std::uint64_t uint_ = 0;
    double double_ = 0.0;
    std::string string_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> members_;
};

/// Formats one double exactly as the JSON emitter does (17 significant
/// digits, shortest C locale form).
std::string json_number(double value);

/// Latin squares serialize as arrays of integer rows, e.g.
/// [[1,2,3],[2,3,1],[3,1,2]].
JsonValue latin_to_json(const LatinSquare& square);
LatinSquare latin_from_json(const std::string& text);

/// Block matrices (model evaluations, magic unitaries) serialize as
///   {"type": "magic_unitary", "n": N, "k": K, "entries": E}
/// where E[i][j] is a K x K array of rows of [re, im] pairs.
JsonValue block_matrix_to_json(const BlockMatrix& u, const std::string& type_tag = "magic_unitary");
BlockMatrix block_matrix_from_json(const std::string& text);

}  // namespace qmm
