#include "qmm/model_file.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qmm {

namespace {

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    size_t end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

long long parse_integer(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        long long parsed = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument("model file: key '" + key + "' needs an integer, got '" +
                                    value + "'");
    }
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        unsigned long long parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument("model file: key '" + key +
                                    "' needs a nonnegative integer, got '" + value + "'");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument("model file: key '" + key + "' needs a number, got '" +
                                    value + "'");
    }
}

class KeySet {
public:
    explicit KeySet(std::vector<std::pair<std::string, std::string>> pairs)
        : pairs_(std::move(pairs)) {}

    bool has(const std::string& key) const {
        return std::any_of(pairs_.begin(), pairs_.end(),
                           [&](const auto& p) { return p.first == key; });
    }

    std::string require(const std::string& key) {
        for (const auto& p : pairs_)
            if (p.first == key) {
                used_.insert(key);
                return p.second;
            }
        throw std::invalid_argument("model file: missing key '" + key + "'");
    }

    std::string optional(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        return require(key);
    }

    void finish() const {
        for (const auto& p : pairs_)
            if (!used_.count(p.first))
                throw std::invalid_argument("model file: unknown key '" + p.first + "'");
    }

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
    std::set<std::string> used_;
};

CayleyTable parse_regular_group(const std::string& literal) {
    std::string text = lower(trim(literal));
    if (text.size() < 2 || (text[0] != 's' && text[0] != 'z'))
        throw std::invalid_argument(
            "model file: regular groups are S2..S5 or Zn, got '" + literal + "'");
    long long order = parse_integer("group", text.substr(1));
    if (text[0] == 's') {
        if (order < 1 || order > 5)
            throw std::invalid_argument("model file: symmetric groups are capped at S5");
        return symmetric_group_table(int(order));
    }
    if (order < 1 || order > 1000)
        throw std::invalid_argument("model file: cyclic groups are capped at Z1000");
    return cyclic_group_table(int(order));
}

}  // namespace

Complex parse_complex_literal(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty complex literal");

    auto parse_part = [](const std::string& part, bool imaginary) -> double {
        if (imaginary && (part.empty() || part == "+")) return 1.0;
        if (imaginary && part == "-") return -1.0;
        size_t used = 0;
        double value = std::stod(part, &used);
        if (used != part.size()) throw std::invalid_argument("bad numeric literal '" + part + "'");
        return value;
    };

    if (s.back() != 'i' && s.back() != 'I') return Complex(parse_part(s, false), 0.0);

    std::string body = s.substr(0, s.size() - 1);
    // split before the sign that separates real and imaginary parts,
    // skipping a leading sign and exponent signs
    size_t split = std::string::npos;
    for (size_t t = 1; t < body.size(); ++t) {
        if ((body[t] == '+' || body[t] == '-') &&
            body[t - 1] != 'e' && body[t - 1] != 'E')
            split = t;
    }
    if (split == std::string::npos) return Complex(0.0, parse_part(body, true));
    return Complex(parse_part(body.substr(0, split), false),
                   parse_part(body.substr(split), true));
}

namespace {

std::vector<std::string> split_top_level(const std::string& text, char separator) {
    std::vector<std::string> parts;
    std::string current;
    int depth = 0;
    for (char c : text) {
        if (c == '[' || c == '(') ++depth;
        if (c == ']' || c == ')') --depth;
        if (c == separator && depth == 0) {
            parts.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    parts.push_back(current);
    return parts;
}

CMatrix parse_matrix_literal(const std::string& text) {
    std::string s = trim(text);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw std::invalid_argument("matrix literal must look like [[a,b],[c,d]]");
    std::vector<std::vector<Complex>> rows;
    for (const std::string& row_text : split_top_level(s.substr(1, s.size() - 2), ',')) {
        std::string row = trim(row_text);
        if (row.size() < 2 || row.front() != '[' || row.back() != ']')
            throw std::invalid_argument("matrix rows must look like [a,b]");
        std::vector<Complex> entries;
        for (const std::string& cell : split_top_level(row.substr(1, row.size() - 2), ','))
            entries.push_back(parse_complex_literal(cell));
        rows.push_back(std::move(entries));
    }
    const size_t n = rows.size();
    CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n)
            throw std::invalid_argument("matrix literal must be square");
        for (size_t c = 0; c < n; ++c) m(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
    }
    return m;
}

}  // namespace

std::vector<CMatrix> parse_matrix_list(const std::string& text) {
    std::vector<CMatrix> matrices;
    for (const std::string& part : split_top_level(text, ';'))
        matrices.push_back(parse_matrix_literal(part));
    if (matrices.empty()) throw std::invalid_argument("empty matrix list");
    for (const auto& m : matrices)
        if (m.rows() != matrices.front().rows())
            throw std::invalid_argument("matrix list entries must have equal size");
    return matrices;
}

std::vector<GroupIndex> parse_index_list(const FiniteAbelianGroup& group,
                                         const std::string& text) {
    std::vector<GroupIndex> indices;
    for (const std::string& part : split_top_level(text, ';')) {
        std::string s = trim(part);
        if (s.size() < 2 || s.front() != '(' || s.back() != ')')
            throw std::invalid_argument("group indices must look like (1) or (1,0)");
        std::vector<int> components;
        for (const std::string& cell : split_top_level(s.substr(1, s.size() - 2), ','))
            components.push_back(int(parse_integer("generators", trim(cell))));
        if (int(components.size()) != group.factor_count())
            throw std::invalid_argument("group index arity does not match the group");
        indices.push_back(index_reduce(group, components));
    }
    if (indices.empty()) throw std::invalid_argument("empty generator list");
    return indices;
}

ParsedModelFile parse_model_text(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::istringstream stream(text);
    std::string line;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("model file line " + std::to_string(line_number) +
                                        ": expected key = value");
        std::string key = lower(trim(line.substr(0, eq)));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("model file line " + std::to_string(line_number) +
                                        ": empty key or value");
        for (const auto& p : pairs)
            if (p.first == key)
                throw std::invalid_argument("model file: duplicate key '" + key + "'");
        pairs.emplace_back(key, value);
    }

    ParsedModelFile out;
    out.echo = pairs;
    KeySet keys(pairs);
    std::string type = lower(keys.require("type"));

    if (type == "weyl") {
        FiniteAbelianGroup group = FiniteAbelianGroup::parse(keys.require("group"));
        std::string ensemble = lower(keys.optional("ensemble", "weyl_group"));
        if (ensemble == "weyl_group") {
            out.model = weyl_model(group, GeneratedWeylGroupEnsemble{});
        } else if (ensemble == "haar") {
            long long samples = parse_integer("samples", keys.require("samples"));
            std::uint64_t seed = parse_seed("seed", keys.require("seed"));
            out.model = weyl_model(group, HaarEnsemble{samples, seed});
        } else {
            throw std::invalid_argument(
                "model file: ensemble must be weyl_group or haar (explicit lists are "
                "API-only), got '" + ensemble + "'");
        }
    } else if (type == "classical") {
        out.model = classical_permutation_model(int(parse_integer("n", keys.require("n"))));
    } else if (type == "half_classical") {
        std::vector<CMatrix> generators = parse_matrix_list(keys.require("generators"));
        // close under entrywise conjugation and multiplication so the
        // file only needs generators
        std::vector<CMatrix> seeds = generators;
        for (const auto& g : generators) seeds.push_back(g.conjugate());
        out.model = half_classical_model(multiplicative_closure(seeds));
    } else if (type == "dual_reflection") {
        FiniteAbelianGroup lambda = FiniteAbelianGroup::parse(keys.require("lambda"));
        out.model = dual_reflection_model(lambda,
                                          parse_index_list(lambda, keys.require("generators")));
    } else if (type == "regular") {
        out.model = regular_representation_model(parse_regular_group(keys.require("group")));
    } else if (type == "latin_fiber") {
        out.model = latin_fiber_model(int(parse_integer("n", keys.require("n"))));
    } else if (type == "root_of_unity") {
        out.model = root_of_unity_model(int(parse_integer("order", keys.require("order"))));
    } else {
        throw std::invalid_argument("model file: unknown type '" + type + "'");
    }

    if (keys.has("tolerance")) {
        out.tolerance = parse_real("tolerance", keys.require("tolerance"));
        if (out.tolerance <= 0.0)
            throw std::invalid_argument("model file: tolerance must be positive");
    }
    keys.finish();
    return out;
}

ParsedModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open model file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model_text(buffer.str());
}

}  // namespace qmm
