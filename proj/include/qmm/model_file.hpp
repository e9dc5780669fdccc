#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qmm/models.hpp"

namespace qmm {

/// A model description read from a plain-text key = value file, together
/// with the raw key/value pairs in file order (echoed into reports) and
/// an optional tolerance override.
struct ParsedModelFile {
    ModelSpec model;
    std::vector<std::pair<std::string, std::string>> echo;
    double tolerance = -1.0;

    bool has_tolerance() const { return tolerance >= 0.0; }
};

/// Parses the key = value model description format:
///   type = weyl | classical | half_classical | dual_reflection |
///          regular | latin_fiber | root_of_unity
/// plus the keys the chosen type needs (group, ensemble, samples, seed,
/// n, order, lambda, generators, tolerance). '#' starts a comment.
/// Unknown, duplicate, or missing keys raise invalid_argument.
ParsedModelFile parse_model_text(const std::string& text);

ParsedModelFile load_model_file(const std::string& path);

/// Parses a scalar complex literal: 1, -2.5, i, -i, 2i, 1+2i, 0.5-1.5i.
Complex parse_complex_literal(const std::string& text);

/// Parses a semicolon-separated list of row-major matrix literals, e.g.
/// [[i,0],[0,-i]] ; [[0,1],[1,0]]. All matrices must be square and of
/// equal size.
std::vector<CMatrix> parse_matrix_list(const std::string& text);

/// Parses a semicolon-separated list of group-index tuples, e.g.
/// (1);(3) or (1,0);(0,2), reduced modulo the group's cyclic orders.
std::vector<GroupIndex> parse_index_list(const FiniteAbelianGroup& group,
                                         const std::string& text);

}  // namespace qmm
