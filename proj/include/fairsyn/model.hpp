#pragma once

#include "fairsyn/dataset.hpp"
#include "fairsyn/marginal.hpp"
#include "fairsyn/privacy.hpp"
#include "fairsyn/rng.hpp"
#include "fairsyn/select.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fairsyn {

// Tree-structured Markov random field fitted to noisy measurements. Only
// NoisyMeasurements enter this module; the original database never does, so
// everything downstream is post-processing of the private release.
struct TreeModel {
    std::vector<AttributeDomain> domains;
    std::vector<std::pair<std::size_t, std::size_t>> edges; // u < v
    std::vector<std::vector<double>> node_dist;              // per attribute
    std::vector<Marginal> edge_dist;                         // normalized, aligned with edges
    std::size_t root = 0;
    std::vector<std::size_t> sampling_order; // BFS from root
    std::vector<std::ptrdiff_t> parent;      // -1 for root
    std::size_t default_rows = 0;            // synthetic row count when caller gives none
};

// Calibrates a TreeModel from the noisy measurements:
//   1. clamp negative entries to 0 (all-zero tables become uniform),
//   2. pool each node distribution as the inverse-variance weighted average
//      of its 1-way measurement and the projections of incident edges
//      (projection variances scale with the summed-out cardinality),
//   3. iterative proportional fitting of every edge table to the pooled node
//      marginals (tolerance 1e-9 total variation, at most 1000 sweeps); an
//      edge whose clamped support cannot be calibrated falls back to the
//      independence coupling of the pooled marginals.
// Deterministic given inputs. Throws MissingMeasurement.
TreeModel fit(const std::vector<NoisyMeasurement>& measurements, const SelectionPlan& plan,
              const std::vector<AttributeDomain>& domains);

// Ancestral sampling: the root is drawn from its node distribution, every
// child from the edge conditional given its sampled parent. Rows are iid and
// the output is deterministic given the stream.
EncodedDatabase sample(const TreeModel& model, std::size_t n_rows, RandomStream& rng);

// Exact 1- or 2-way marginal of the fitted distribution via message passing
// along the unique tree path; no sampling involved.
Marginal model_marginal(const TreeModel& model, std::span<const std::size_t> clique);

// Total variation distance between two distributions of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

std::string model_to_json(const TreeModel& model);
TreeModel model_from_json(const std::string& text);

} // namespace fairsyn
