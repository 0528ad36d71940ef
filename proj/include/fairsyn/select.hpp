#pragma once

#include "fairsyn/dataset.hpp"
#include "fairsyn/marginal.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace fairsyn {

// Which marginals to measure: every 1-way marginal, plus the 2-way marginals
// on a maximum spanning tree whose edge weights are pairwise mutual
// information. The tree is the skeleton of the fitted Markov random field.
struct SelectionPlan {
    std::vector<std::vector<std::size_t>> one_way; // {{0},{1},...}
    std::vector<std::pair<std::size_t, std::size_t>> tree_edges; // u < v
    std::vector<double> edge_weights; // nats, aligned with tree_edges
};

// I(X;Y) over a normalized 2-way marginal, natural log. Zero-probability
// cells contribute nothing; negative round-off is clamped to 0.
double mutual_information(const Marginal& joint);

// Plan from empirical (non-noisy) pairwise marginals of the database.
// Deterministic: ties are broken by (weight desc, u asc, v asc).
SelectionPlan build_plan(const EncodedDatabase& db);

// Plan from caller-supplied normalized pairwise joints, one per (u,v) with
// u < v in lexicographic order. Used by the noisy-selection switch.
SelectionPlan build_plan_from_joints(std::size_t attribute_count,
                                     const std::vector<Marginal>& pairwise_joints);

// Forces (u,v) into the tree. If absent, it is added and the lowest-weight
// edge on the induced cycle is dropped, so the result is again a tree.
void force_edge(SelectionPlan& plan, std::size_t u, std::size_t v, double weight);

// Audit-log form {edges:[["a","b"],...], weights:[...]} plus the 1-way list.
std::string plan_to_json(const SelectionPlan& plan, const std::vector<AttributeDomain>& domains);
SelectionPlan plan_from_json(const std::string& text, const std::vector<AttributeDomain>& domains);

} // namespace fairsyn
