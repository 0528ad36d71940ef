#include "fairsyn/model.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairsyn {

namespace {

constexpr double kIpfTolerance = 1e-9;
constexpr int kIpfMaxSweeps = 1000;

struct NodeSource {
    std::vector<double> dist;
    double sigma = 0.0;
    double drop_factor = 1.0; // cardinality summed out before projecting
};

std::vector<double> pool_node(const std::vector<NodeSource>& sources) {
    // Exact sources (sigma == 0) agree with each other by construction, so
    // average them with equal weight and ignore the noisy ones.
    bool any_exact = std::any_of(sources.begin(), sources.end(),
                                 [](const NodeSource& s) { return s.sigma == 0.0; });
    std::size_t n = sources.front().dist.size();
    std::vector<double> pooled(n, 0.0);
    double weight_sum = 0.0;
    for (const auto& s : sources) {
        if (any_exact && s.sigma != 0.0) continue;
        double w = any_exact ? 1.0 : 1.0 / (s.sigma * s.sigma * s.drop_factor);
        for (std::size_t i = 0; i < n; ++i) pooled[i] += w * s.dist[i];
        weight_sum += w;
    }
    for (double& v : pooled) v /= weight_sum;
    return pooled;
}

// IPF of a 2-way table to row targets p and column targets q. A zero slice
// whose target is positive is reseeded uniformly so the fit stays feasible.
// Returns false when the table's support admits no coupling of the targets
// and the sweep limit runs out.
bool ipf_calibrate(std::vector<double>& table, std::size_t nu, std::size_t nv,
                   std::span<const double> p, std::span<const double> q) {
    std::vector<double> row_sum(nu), col_sum(nv);
    for (int sweep = 0; sweep < kIpfMaxSweeps; ++sweep) {
        std::fill(row_sum.begin(), row_sum.end(), 0.0);
        for (std::size_t i = 0; i < nu; ++i)
            for (std::size_t j = 0; j < nv; ++j) row_sum[i] += table[i * nv + j];
        for (std::size_t i = 0; i < nu; ++i) {
            if (row_sum[i] > 0.0) {
                double f = p[i] / row_sum[i];
                for (std::size_t j = 0; j < nv; ++j) table[i * nv + j] *= f;
            } else if (p[i] > 0.0) {
                for (std::size_t j = 0; j < nv; ++j) table[i * nv + j] = p[i] / static_cast<double>(nv);
            }
        }
        std::fill(col_sum.begin(), col_sum.end(), 0.0);
        for (std::size_t i = 0; i < nu; ++i)
            for (std::size_t j = 0; j < nv; ++j) col_sum[j] += table[i * nv + j];
        for (std::size_t j = 0; j < nv; ++j) {
            if (col_sum[j] > 0.0) {
                double f = q[j] / col_sum[j];
                for (std::size_t i = 0; i < nu; ++i) table[i * nv + j] *= f;
            } else if (q[j] > 0.0) {
                for (std::size_t i = 0; i < nu; ++i) table[i * nv + j] = q[j] / static_cast<double>(nu);
            }
        }
        // Column sums now match exactly; convergence hinges on the rows.
        std::fill(row_sum.begin(), row_sum.end(), 0.0);
        for (std::size_t i = 0; i < nu; ++i)
            for (std::size_t j = 0; j < nv; ++j) row_sum[i] += table[i * nv + j];
        double tv = 0.0;
        for (std::size_t i = 0; i < nu; ++i) tv += std::abs(row_sum[i] - p[i]);
        if (0.5 * tv <= kIpfTolerance) return true;
    }
    return false;
}

std::uint32_t draw_categorical(std::span<const double> probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<std::uint32_t>(i);
    }
    return static_cast<std::uint32_t>(probs.size() - 1);
}

} // namespace

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw ShapeMismatch("distributions differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
    return 0.5 * sum;
}

TreeModel fit(const std::vector<NoisyMeasurement>& measurements, const SelectionPlan& plan,
              const std::vector<AttributeDomain>& domains) {
    std::size_t d = domains.size();

    // Locate the required measurements.
    std::vector<std::ptrdiff_t> one_way_idx(d, -1);
    std::vector<std::ptrdiff_t> edge_idx(plan.tree_edges.size(), -1);
    for (std::size_t m = 0; m < measurements.size(); ++m) {
        const auto& clique = measurements[m].marginal.clique;
        if (clique.size() == 1 && clique[0] < d) {
            one_way_idx[clique[0]] = static_cast<std::ptrdiff_t>(m);
        } else if (clique.size() == 2) {
            for (std::size_t e = 0; e < plan.tree_edges.size(); ++e) {
                if (clique[0] == plan.tree_edges[e].first && clique[1] == plan.tree_edges[e].second)
                    edge_idx[e] = static_cast<std::ptrdiff_t>(m);
            }
        }
    }
    for (std::size_t a = 0; a < d; ++a)
        if (one_way_idx[a] < 0)
            throw MissingMeasurement("no 1-way measurement for attribute " + domains[a].name);
    for (std::size_t e = 0; e < plan.tree_edges.size(); ++e)
        if (edge_idx[e] < 0)
            throw MissingMeasurement("no measurement for edge (" +
                                     domains[plan.tree_edges[e].first].name + "," +
                                     domains[plan.tree_edges[e].second].name + ")");

    // Clamp and normalize every table once.
    std::vector<std::vector<double>> node_tables(d);
    for (std::size_t a = 0; a < d; ++a)
        node_tables[a] = clamp_normalize(measurements[one_way_idx[a]].marginal).table;
    std::vector<std::vector<double>> edge_tables(plan.tree_edges.size());
    for (std::size_t e = 0; e < plan.tree_edges.size(); ++e)
        edge_tables[e] = clamp_normalize(measurements[edge_idx[e]].marginal).table;

    // Pool node distributions: the 1-way measurement plus each incident edge
    // projection, weighted by 1/(sigma^2 * summed-out cardinality).
    TreeModel model;
    model.domains = domains;
    model.edges = plan.tree_edges;
    model.node_dist.resize(d);
    for (std::size_t a = 0; a < d; ++a) {
        std::size_t card = domains[a].cardinality();
        std::vector<NodeSource> sources;
        sources.push_back({node_tables[a], measurements[one_way_idx[a]].sigma, 1.0});
        for (std::size_t e = 0; e < plan.tree_edges.size(); ++e) {
            auto [u, v] = plan.tree_edges[e];
            if (u != a && v != a) continue;
            std::size_t other = u == a ? v : u;
            std::size_t other_card = domains[other].cardinality();
            std::vector<double> proj(card, 0.0);
            const auto& t = edge_tables[e];
            std::size_t nv = domains[v].cardinality();
            for (std::size_t i = 0; i < domains[u].cardinality(); ++i)
                for (std::size_t j = 0; j < nv; ++j)
                    proj[u == a ? i : j] += t[i * nv + j];
            sources.push_back({std::move(proj), measurements[edge_idx[e]].sigma,
                               static_cast<double>(other_card)});
        }
        model.node_dist[a] = pool_node(sources);
    }

    // Calibrate each edge to its pooled endpoints. Heavy clamping can leave a
    // support that admits no coupling of the targets; such an edge falls back
    // to the independence coupling, which matches both marginals exactly.
    model.edge_dist.reserve(plan.tree_edges.size());
    for (std::size_t e = 0; e < plan.tree_edges.size(); ++e) {
        auto [u, v] = plan.tree_edges[e];
        std::size_t nu = domains[u].cardinality();
        std::size_t nv = domains[v].cardinality();
        if (!ipf_calibrate(edge_tables[e], nu, nv, model.node_dist[u], model.node_dist[v])) {
            for (std::size_t i = 0; i < nu; ++i)
                for (std::size_t j = 0; j < nv; ++j)
                    edge_tables[e][i * nv + j] = model.node_dist[u][i] * model.node_dist[v][j];
        }
        Marginal m;
        m.clique = {u, v};
        m.shape = {nu, nv};
        m.table = std::move(edge_tables[e]);
        m.normalized = true;
        model.edge_dist.push_back(std::move(m));
    }

    // Root is the lowest attribute index; sampling order is BFS with
    // ascending neighbor order.
    model.root = 0;
    model.parent.assign(d, -1);
    std::vector<std::vector<std::size_t>> adj(d);
    for (const auto& [u, v] : plan.tree_edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    std::vector<bool> seen(d, false);
    model.sampling_order.push_back(model.root);
    seen[model.root] = true;
    for (std::size_t qi = 0; qi < model.sampling_order.size(); ++qi) {
        std::size_t x = model.sampling_order[qi];
        for (std::size_t y : adj[x]) {
            if (!seen[y]) {
                seen[y] = true;
                model.parent[y] = static_cast<std::ptrdiff_t>(x);
                model.sampling_order.push_back(y);
            }
        }
    }
    if (model.sampling_order.size() != d)
        throw MissingMeasurement("plan edges do not connect all attributes");

    // Synthetic size hint from the noisy 1-way totals (post-processing only);
    // callers that know the intended row count overwrite this.
    double mean_total = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        const auto& t = measurements[one_way_idx[a]].marginal.table;
        mean_total += std::accumulate(t.begin(), t.end(), 0.0);
    }
    mean_total /= static_cast<double>(d);
    model.default_rows = mean_total > 1.0 ? static_cast<std::size_t>(std::llround(mean_total)) : 1;

    return model;
}

namespace {

// Index of the edge joining u and v, or -1.
std::ptrdiff_t find_edge(const TreeModel& model, std::size_t u, std::size_t v) {
    if (u > v) std::swap(u, v);
    for (std::size_t e = 0; e < model.edges.size(); ++e)
        if (model.edges[e].first == u && model.edges[e].second == v)
            return static_cast<std::ptrdiff_t>(e);
    return -1;
}

// P(child | parent = code): a slice of the edge table, renormalized. The row
// is uniform when the conditioning mass is zero.
std::vector<double> edge_conditional(const TreeModel& model, std::size_t edge,
                                     std::size_t parent, std::uint32_t parent_code) {
    const Marginal& m = model.edge_dist[edge];
    auto [u, v] = model.edges[edge];
    std::size_t nu = m.shape[0], nv = m.shape[1];
    std::vector<double> probs;
    double total = 0.0;
    if (parent == u) {
        probs.assign(m.table.begin() + static_cast<std::ptrdiff_t>(parent_code * nv),
                     m.table.begin() + static_cast<std::ptrdiff_t>((parent_code + 1) * nv));
    } else {
        probs.resize(nu);
        for (std::size_t i = 0; i < nu; ++i) probs[i] = m.table[i * nv + parent_code];
    }
    for (double p : probs) total += p;
    if (total <= 0.0) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(probs.size()));
    } else {
        for (double& p : probs) p /= total;
    }
    return probs;
}

} // namespace

EncodedDatabase sample(const TreeModel& model, std::size_t n_rows, RandomStream& rng) {
    std::size_t d = model.domains.size();
    std::vector<std::ptrdiff_t> parent_edge(d, -1);
    for (std::size_t a : model.sampling_order) {
        if (model.parent[a] >= 0)
            parent_edge[a] = find_edge(model, static_cast<std::size_t>(model.parent[a]), a);
    }

    DatabaseBuilder builder(model.domains);
    std::vector<std::uint32_t> row(d);
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t a : model.sampling_order) {
            if (model.parent[a] < 0) {
                row[a] = draw_categorical(model.node_dist[a], rng.next_double());
            } else {
                auto probs = edge_conditional(model, static_cast<std::size_t>(parent_edge[a]),
                                              static_cast<std::size_t>(model.parent[a]),
                                              row[static_cast<std::size_t>(model.parent[a])]);
                row[a] = draw_categorical(probs, rng.next_double());
            }
        }
        builder.add_row(row);
    }
    return std::move(builder).build();
}

Marginal model_marginal(const TreeModel& model, std::span<const std::size_t> clique) {
    std::size_t d = model.domains.size();
    if (clique.empty() || clique.size() > 2) throw BadClique("model marginals cover 1- and 2-way cliques");
    for (std::size_t a : clique)
        if (a >= d) throw BadClique("attribute index out of range");

    if (clique.size() == 1) {
        Marginal m;
        m.clique = {clique[0]};
        m.shape = {model.node_dist[clique[0]].size()};
        m.table = model.node_dist[clique[0]];
        m.normalized = true;
        return m;
    }

    std::size_t a = clique[0], b = clique[1];
    if (a == b) throw BadClique("duplicate attribute in clique");

    Marginal out;
    out.clique = {a, b};
    out.shape = {model.domains[a].cardinality(), model.domains[b].cardinality()};
    out.normalized = true;

    std::ptrdiff_t e = find_edge(model, a, b);
    if (e >= 0) {
        const Marginal& stored = model.edge_dist[static_cast<std::size_t>(e)];
        out.table.assign(out.shape[0] * out.shape[1], 0.0);
        bool flipped = stored.clique[0] != a;
        for (std::size_t i = 0; i < stored.shape[0]; ++i)
            for (std::size_t j = 0; j < stored.shape[1]; ++j) {
                double p = stored.table[i * stored.shape[1] + j];
                if (flipped) out.table[j * out.shape[1] + i] = p;
                else out.table[i * out.shape[1] + j] = p;
            }
        return out;
    }

    // Off-edge pair: push P(a, .) along the unique tree path a -> b.
    std::vector<std::vector<std::size_t>> adj(d);
    for (const auto& [u, v] : model.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<std::ptrdiff_t> prev(d, -1);
    std::vector<bool> seen(d, false);
    std::vector<std::size_t> queue{a};
    seen[a] = true;
    for (std::size_t qi = 0; qi < queue.size() && !seen[b]; ++qi) {
        for (std::size_t y : adj[queue[qi]]) {
            if (!seen[y]) {
                seen[y] = true;
                prev[y] = static_cast<std::ptrdiff_t>(queue[qi]);
                queue.push_back(y);
            }
        }
    }
    if (!seen[b]) throw BadClique("attributes are not connected in the tree");
    std::vector<std::size_t> path;
    for (std::size_t x = b;; x = static_cast<std::size_t>(prev[x])) {
        path.push_back(x);
        if (x == a) break;
    }
    std::reverse(path.begin(), path.end());

    // joint[i][k] = P(a = i, path[step] = k), advanced one hop at a time.
    std::size_t na = model.domains[a].cardinality();
    std::vector<double> joint(na, 0.0);
    std::size_t ncur = 1;
    {
        // Initialize with the first hop's edge distribution.
        std::ptrdiff_t e0 = find_edge(model, path[0], path[1]);
        const Marginal& m0 = model.edge_dist[static_cast<std::size_t>(e0)];
        ncur = model.domains[path[1]].cardinality();
        joint.assign(na * ncur, 0.0);
        bool flipped = m0.clique[0] != a;
        for (std::size_t i = 0; i < m0.shape[0]; ++i)
            for (std::size_t j = 0; j < m0.shape[1]; ++j) {
                double p = m0.table[i * m0.shape[1] + j];
                if (flipped) joint[j * ncur + i] = p;
                else joint[i * ncur + j] = p;
            }
    }
    for (std::size_t step = 1; step + 1 < path.size(); ++step) {
        std::size_t mid = path[step], next = path[step + 1];
        std::size_t nnext = model.domains[next].cardinality();
        std::ptrdiff_t eh = find_edge(model, mid, next);
        const Marginal& mh = model.edge_dist[static_cast<std::size_t>(eh)];
        // Conditional P(next | mid) from the hop's edge table.
        std::vector<double> cond(model.domains[mid].cardinality() * nnext, 0.0);
        for (std::size_t k = 0; k < model.domains[mid].cardinality(); ++k) {
            auto probs = edge_conditional(model, static_cast<std::size_t>(eh), mid,
                                          static_cast<std::uint32_t>(k));
            // Zero conditioning mass contributes nothing downstream.
            double mid_mass = 0.0;
            if (mh.clique[0] == mid) {
                for (std::size_t j = 0; j < mh.shape[1]; ++j) mid_mass += mh.table[k * mh.shape[1] + j];
            } else {
                for (std::size_t i = 0; i < mh.shape[0]; ++i) mid_mass += mh.table[i * mh.shape[1] + k];
            }
            for (std::size_t j = 0; j < nnext; ++j) cond[k * nnext + j] = mid_mass > 0.0 ? probs[j] : 0.0;
        }
        std::vector<double> next_joint(na * nnext, 0.0);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t k = 0; k < ncur; ++k) {
                double p = joint[i * ncur + k];
                if (p == 0.0) continue;
                for (std::size_t j = 0; j < nnext; ++j)
                    next_joint[i * nnext + j] += p * cond[k * nnext + j];
            }
        joint = std::move(next_joint);
        ncur = nnext;
    }
    out.table = std::move(joint);
    return out;
}

std::string model_to_json(const TreeModel& model) {
    nlohmann::json j;
    auto attrs = nlohmann::json::array();
    for (const auto& dom : model.domains) {
        nlohmann::json a;
        a["name"] = dom.name;
        a["kind"] = dom.kind == DomainKind::categorical ? "categorical" : "numeric";
        if (dom.kind == DomainKind::categorical) a["levels"] = dom.levels;
        else a["bin_edges"] = dom.bin_edges;
        a["allow_missing"] = dom.allow_missing;
        attrs.push_back(std::move(a));
    }
    j["domains"] = attrs;
    auto edges = nlohmann::json::array();
    for (const auto& [u, v] : model.edges) edges.push_back({u, v});
    j["edges"] = edges;
    j["node_dist"] = model.node_dist;
    auto edge_tables = nlohmann::json::array();
    for (const auto& m : model.edge_dist) edge_tables.push_back(m.table);
    j["edge_dist"] = edge_tables;
    j["root"] = model.root;
    j["default_rows"] = model.default_rows;
    return j.dump(2);
}

TreeModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    TreeModel model;
    try {
        for (const auto& a : j.at("domains")) {
            AttributeDomain dom;
            dom.name = a.at("name").get<std::string>();
            dom.kind = a.at("kind").get<std::string>() == "categorical" ? DomainKind::categorical
                                                                        : DomainKind::numeric_binned;
            if (dom.kind == DomainKind::categorical) dom.levels = a.at("levels").get<std::vector<std::string>>();
            else dom.bin_edges = a.at("bin_edges").get<std::vector<double>>();
            dom.allow_missing = a.value("allow_missing", false);
            dom.validate();
            model.domains.push_back(std::move(dom));
        }
        for (const auto& e : j.at("edges"))
            model.edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
        model.node_dist = j.at("node_dist").get<std::vector<std::vector<double>>>();
        std::size_t k = 0;
        for (const auto& t : j.at("edge_dist")) {
            Marginal m;
            auto [u, v] = model.edges.at(k++);
            m.clique = {u, v};
            m.shape = {model.domains.at(u).cardinality(), model.domains.at(v).cardinality()};
            m.table = t.get<std::vector<double>>();
            m.normalized = true;
            if (m.table.size() != m.shape[0] * m.shape[1])
                throw ShapeMismatch("edge table size does not match the domains");
            model.edge_dist.push_back(std::move(m));
        }
        model.root = j.at("root").get<std::size_t>();
        model.default_rows = j.value("default_rows", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }

    if (model.node_dist.size() != model.domains.size())
        throw ShapeMismatch("node distributions do not match the domains");
    for (std::size_t a = 0; a < model.domains.size(); ++a)
        if (model.node_dist[a].size() != model.domains[a].cardinality())
            throw ShapeMismatch("node distribution size mismatch for " + model.domains[a].name);

    // Rebuild the sampling order.
    std::size_t d = model.domains.size();
    model.parent.assign(d, -1);
    std::vector<std::vector<std::size_t>> adj(d);
    for (const auto& [u, v] : model.edges) {
        if (u >= d || v >= d) throw ShapeMismatch("edge endpoint out of range");
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
    std::vector<bool> seen(d, false);
    model.sampling_order.clear();
    model.sampling_order.push_back(model.root);
    seen[model.root] = true;
    for (std::size_t qi = 0; qi < model.sampling_order.size(); ++qi) {
        for (std::size_t y : adj[model.sampling_order[qi]]) {
            if (!seen[y]) {
                seen[y] = true;
                model.parent[y] = static_cast<std::ptrdiff_t>(model.sampling_order[qi]);
                model.sampling_order.push_back(y);
            }
        }
    }
    if (model.sampling_order.size() != d) throw ParseError("model edges do not connect all attributes");
    return model;
}

} // namespace fairsyn
