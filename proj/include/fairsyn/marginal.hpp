#pragma once

#include "fairsyn/dataset.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fairsyn {

// Count (or probability) table over the value combinations of an attribute
// subset. The table is a flat row-major vector; the first clique attribute is
// the slowest-varying index, so cross-implementation orderings agree.
struct Marginal {
    std::vector<std::size_t> clique; // attribute indices, as given
    std::vector<std::size_t> shape;  // per-attribute cardinalities
    std::vector<double> table;       // length = product of shape
    bool normalized = false;

    std::size_t size() const { return table.size(); }

    std::size_t flat_index(std::span<const std::size_t> coords) const;

    // Total mass of the table.
    double total() const;
};

// table[t] = number of rows whose restriction to the clique equals t.
Marginal count_marginal(const EncodedDatabase& db, std::span<const std::size_t> clique);

// Sums out the attributes of m not named in sub_clique; preserves total mass.
// sub_clique may reorder the surviving attributes.
Marginal project(const Marginal& m, std::span<const std::size_t> sub_clique);

// Sum of |a - b| over cells. Requires identical clique and shape.
double l1_error(const Marginal& a, const Marginal& b);

// Rescales to unit mass. Throws DomainError on zero or negative total.
Marginal normalize(const Marginal& m);

// Repair step for noisy tables: clamps negative entries to zero and rescales
// to unit mass; an all-zero table becomes uniform.
Marginal clamp_normalize(const Marginal& m);

// JSON form {clique:[names], shape:[...], table:[...], normalized:bool}.
std::string marginal_to_json(const Marginal& m, const std::vector<AttributeDomain>& domains);
Marginal marginal_from_json(const std::string& text, const std::vector<AttributeDomain>& domains);

} // namespace fairsyn
