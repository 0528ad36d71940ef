#include "fairsyn/privacy.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <cmath>

namespace fairsyn {

BudgetAllocation allocate(double rho_total, const SelectionPlan& plan,
                          const std::vector<AttributeDomain>& domains) {
    if (!(rho_total > 0.0)) throw NonPositiveBudget("rho must be positive");

    BudgetAllocation alloc;
    alloc.rho_total = rho_total;
    std::size_t d = plan.one_way.size();
    std::size_t n_edges = plan.tree_edges.size();

    // Degenerate single-attribute plan: the whole budget on one marginal.
    double one_way_rho = n_edges == 0 ? rho_total / static_cast<double>(d)
                                      : rho_total / (2.0 * static_cast<double>(d));
    for (const auto& ow : plan.one_way) {
        MeasurementShare s;
        s.id = "1way/" + domains.at(ow[0]).name;
        s.clique = ow;
        s.rho = one_way_rho;
        s.sigma = std::sqrt(1.0 / (2.0 * s.rho));
        alloc.shares.push_back(std::move(s));
    }
    if (n_edges > 0) {
        double edge_rho = rho_total / (2.0 * static_cast<double>(n_edges));
        for (const auto& [u, v] : plan.tree_edges) {
            MeasurementShare s;
            s.id = "edge/" + domains.at(u).name + "," + domains.at(v).name;
            s.clique = {u, v};
            s.rho = edge_rho;
            s.sigma = std::sqrt(1.0 / (2.0 * s.rho));
            alloc.shares.push_back(std::move(s));
        }
    }
    return alloc;
}

NoisyMeasurement gaussian_mechanism(const Marginal& m, double sigma, RandomStream& rng) {
    if (sigma < 0.0) throw NegativeSigma("sigma must be non-negative");
    NoisyMeasurement out;
    out.marginal = m;
    out.marginal.normalized = false;
    out.sigma = sigma;
    if (sigma == 0.0) return out; // testing mode
    for (double& v : out.marginal.table) v += rng.next_gaussian(sigma);
    return out;
}

double rdp_curve(const BudgetAllocation& alloc, double alpha) {
    if (alpha < 1.0) throw BadAlpha("alpha must be >= 1");
    double gamma = 0.0;
    for (const auto& s : alloc.shares) gamma += alpha / (2.0 * s.sigma * s.sigma);
    return gamma;
}

double renyi_divergence_gaussian(std::span<const double> mu1, std::span<const double> mu2,
                                 double sigma, double alpha) {
    if (mu1.size() != mu2.size()) throw ShapeMismatch("mean vectors differ in length");
    if (!(sigma > 0.0)) throw NegativeSigma("sigma must be positive");
    if (!(alpha > 1.0)) throw BadAlpha("alpha must be > 1");
    double sq = 0.0;
    for (std::size_t i = 0; i < mu1.size(); ++i) {
        double d = mu1[i] - mu2[i];
        sq += d * d;
    }
    return alpha * sq / (2.0 * sigma * sigma);
}

double epsilon_delta_to_rho(double epsilon, double delta) {
    if (!(epsilon > 0.0)) throw NonPositiveBudget("epsilon must be positive");
    if (!(delta > 0.0) || !(delta < 1.0)) throw BadDelta("delta must lie in (0, 1)");
    double l = std::log(1.0 / delta);
    double r = std::sqrt(l + epsilon) - std::sqrt(l);
    return r * r;
}

std::string accountant_to_json(const BudgetAllocation& alloc,
                               const std::vector<AttributeDomain>& domains,
                               std::span<const double> alphas,
                               const std::vector<std::string>& notes) {
    nlohmann::json j;
    j["rho_total"] = alloc.rho_total;
    auto per = nlohmann::json::array();
    for (const auto& s : alloc.shares) {
        nlohmann::json m;
        auto names = nlohmann::json::array();
        for (std::size_t a : s.clique) names.push_back(domains.at(a).name);
        m["clique"] = names;
        m["rho"] = s.rho;
        m["sigma"] = s.sigma;
        per.push_back(std::move(m));
    }
    j["per_measurement"] = per;
    auto gammas = nlohmann::json::array();
    for (double a : alphas) gammas.push_back({{"alpha", a}, {"gamma", rdp_curve(alloc, a)}});
    j["gamma_at"] = gammas;
    j["notes"] = notes;
    return j.dump(2);
}

} // namespace fairsyn
