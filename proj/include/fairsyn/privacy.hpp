#pragma once

#include "fairsyn/marginal.hpp"
#include "fairsyn/rng.hpp"
#include "fairsyn/select.hpp"

#include <span>
#include <string>
#include <vector>

namespace fairsyn {

// Gaussian mechanism on marginals plus the Renyi accountant for the whole
// measurement procedure.
//
// Budgets are expressed as rho, the coefficient such that the procedure
// satisfies (alpha, alpha*rho)-RDP for every alpha >= 1. Neighboring
// databases differ in exactly one row, and one row changes exactly one cell
// of each marginal by 1, so every marginal has L2 sensitivity 1.

struct MeasurementShare {
    std::string id;                  // "1way/<name>" or "edge/<name>,<name>"
    std::vector<std::size_t> clique;
    double rho = 0.0;
    double sigma = 0.0;              // sqrt(1 / (2 rho))
};

struct BudgetAllocation {
    double rho_total = 0.0;
    std::vector<MeasurementShare> shares; // one-ways first, then tree edges
};

// A marginal after Gaussian perturbation. Entries may be negative or
// fractional; nothing is rounded or clamped here.
struct NoisyMeasurement {
    Marginal marginal;
    double sigma = 0.0;
};

// Half of rho_total is split equally over the d one-way marginals, the other
// half equally over the d-1 tree edges. A single-attribute plan receives the
// whole budget on its one marginal.
BudgetAllocation allocate(double rho_total, const SelectionPlan& plan,
                          const std::vector<AttributeDomain>& domains);

// Adds iid N(0, sigma^2) noise to every table entry. sigma = 0 is permitted
// for the no-noise testing mode and returns the input unchanged.
NoisyMeasurement gaussian_mechanism(const Marginal& m, double sigma, RandomStream& rng);

// gamma(alpha) for the whole allocation: sum over measurements of
// alpha * Delta^2 / (2 sigma_i^2) with Delta = 1, which equals alpha * rho_total.
double rdp_curve(const BudgetAllocation& alloc, double alpha);

// Closed-form Renyi divergence of order alpha between N(mu1, sigma^2 I) and
// N(mu2, sigma^2 I): alpha * |mu1 - mu2|^2 / (2 sigma^2). Diagnostic oracle
// for the accountant.
double renyi_divergence_gaussian(std::span<const double> mu1, std::span<const double> mu2,
                                 double sigma, double alpha);

// rho = (sqrt(ln(1/delta) + eps) - sqrt(ln(1/delta)))^2, the inversion of
// eps = rho + 2 sqrt(rho ln(1/delta)). This is the documented convention for
// the CLI's --epsilon/--delta path; the budget itself is always rho.
double epsilon_delta_to_rho(double epsilon, double delta);

// Accountant report {rho_total, per_measurement:[{clique,rho,sigma}],
// gamma_at:[{alpha,gamma}], notes:[...]}.
std::string accountant_to_json(const BudgetAllocation& alloc,
                               const std::vector<AttributeDomain>& domains,
                               std::span<const double> alphas,
                               const std::vector<std::string>& notes);

} // namespace fairsyn
