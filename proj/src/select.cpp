#include "fairsyn/select.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairsyn {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

struct WeightedEdge {
    std::size_t u, v;
    double weight;
};

// Kruskal with the deterministic tie-break (weight desc, u asc, v asc).
std::vector<WeightedEdge> max_spanning_tree(std::size_t n, std::vector<WeightedEdge> edges) {
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    UnionFind uf(n);
    std::vector<WeightedEdge> tree;
    tree.reserve(n > 0 ? n - 1 : 0);
    for (const auto& e : edges) {
        if (uf.unite(e.u, e.v)) tree.push_back(e);
        if (tree.size() + 1 == n) break;
    }
    return tree;
}

SelectionPlan assemble_plan(std::size_t d, std::vector<WeightedEdge> tree) {
    std::sort(tree.begin(), tree.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    SelectionPlan plan;
    plan.one_way.reserve(d);
    for (std::size_t a = 0; a < d; ++a) plan.one_way.push_back({a});
    for (const auto& e : tree) {
        plan.tree_edges.emplace_back(e.u, e.v);
        plan.edge_weights.push_back(e.weight);
    }
    return plan;
}

} // namespace

double mutual_information(const Marginal& joint) {
    if (joint.clique.size() != 2) throw Not2Way("mutual information needs a 2-way marginal");
    if (!joint.normalized || std::abs(joint.total() - 1.0) > 1e-9)
        throw NotNormalized("mutual information needs a normalized marginal");

    std::size_t nx = joint.shape[0], ny = joint.shape[1];
    std::vector<double> px(nx, 0.0), py(ny, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double p = joint.table[x * ny + y];
            px[x] += p;
            py[y] += p;
        }
    double mi = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            double p = joint.table[x * ny + y];
            if (p > 0.0) mi += p * std::log(p / (px[x] * py[y]));
        }
    return std::max(mi, 0.0);
}

SelectionPlan build_plan(const EncodedDatabase& db) {
    std::size_t d = db.attribute_count();
    if (d == 0 || db.row_count() == 0) throw EmptyDatabase("plan needs at least one attribute and one row");

    std::vector<WeightedEdge> edges;
    edges.reserve(d * (d - 1) / 2);
    for (std::size_t u = 0; u < d; ++u) {
        for (std::size_t v = u + 1; v < d; ++v) {
            std::size_t clique[2] = {u, v};
            Marginal joint = normalize(count_marginal(db, clique));
            edges.push_back({u, v, mutual_information(joint)});
        }
    }
    return assemble_plan(d, max_spanning_tree(d, std::move(edges)));
}

SelectionPlan build_plan_from_joints(std::size_t attribute_count,
                                     const std::vector<Marginal>& pairwise_joints) {
    std::size_t d = attribute_count;
    if (d == 0) throw EmptyDatabase("plan needs at least one attribute");
    if (pairwise_joints.size() != d * (d - 1) / 2)
        throw ShapeMismatch("expected one joint per attribute pair");

    std::vector<WeightedEdge> edges;
    std::size_t k = 0;
    for (std::size_t u = 0; u < d; ++u) {
        for (std::size_t v = u + 1; v < d; ++v, ++k) {
            const Marginal& joint = pairwise_joints[k];
            if (joint.clique.size() != 2 || joint.clique[0] != u || joint.clique[1] != v)
                throw BadClique("pairwise joint out of order: expected (" + std::to_string(u) + "," +
                                std::to_string(v) + ")");
            edges.push_back({u, v, mutual_information(joint)});
        }
    }
    return assemble_plan(d, max_spanning_tree(d, std::move(edges)));
}

void force_edge(SelectionPlan& plan, std::size_t u, std::size_t v, double weight) {
    if (u == v) throw BadClique("forced edge endpoints must differ");
    if (u > v) std::swap(u, v);
    for (const auto& e : plan.tree_edges)
        if (e.first == u && e.second == v) return; // already present

    std::size_t d = plan.one_way.size();
    // Path from u to v in the current tree (BFS over the edge list).
    std::vector<std::vector<std::size_t>> adj(d);
    for (std::size_t i = 0; i < plan.tree_edges.size(); ++i) {
        adj[plan.tree_edges[i].first].push_back(i);
        adj[plan.tree_edges[i].second].push_back(i);
    }
    std::vector<std::ptrdiff_t> via(d, -1);
    std::vector<std::size_t> queue{u};
    std::vector<bool> seen(d, false);
    seen[u] = true;
    for (std::size_t qi = 0; qi < queue.size() && !seen[v]; ++qi) {
        std::size_t x = queue[qi];
        for (std::size_t ei : adj[x]) {
            std::size_t y = plan.tree_edges[ei].first == x ? plan.tree_edges[ei].second
                                                           : plan.tree_edges[ei].first;
            if (!seen[y]) {
                seen[y] = true;
                via[y] = static_cast<std::ptrdiff_t>(ei);
                queue.push_back(y);
            }
        }
    }
    if (!seen[v]) throw BadClique("plan edges do not form a connected tree");

    // Drop the lowest-weight edge on the induced cycle.
    std::size_t drop = static_cast<std::size_t>(via[v]);
    std::size_t x = v;
    while (x != u) {
        std::size_t ei = static_cast<std::size_t>(via[x]);
        if (plan.edge_weights[ei] < plan.edge_weights[drop]) drop = ei;
        x = plan.tree_edges[ei].first == x ? plan.tree_edges[ei].second : plan.tree_edges[ei].first;
    }
    plan.tree_edges[drop] = {u, v};
    plan.edge_weights[drop] = weight;

    // Keep the deterministic (u asc, v asc) edge order.
    std::vector<std::size_t> order(plan.tree_edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return plan.tree_edges[a] < plan.tree_edges[b];
    });
    SelectionPlan sorted = plan;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.tree_edges[i] = plan.tree_edges[order[i]];
        sorted.edge_weights[i] = plan.edge_weights[order[i]];
    }
    plan = std::move(sorted);
}

std::string plan_to_json(const SelectionPlan& plan, const std::vector<AttributeDomain>& domains) {
    nlohmann::json j;
    auto names = nlohmann::json::array();
    for (const auto& ow : plan.one_way) names.push_back(domains.at(ow[0]).name);
    j["one_way"] = names;
    auto edges = nlohmann::json::array();
    for (const auto& [u, v] : plan.tree_edges)
        edges.push_back({domains.at(u).name, domains.at(v).name});
    j["edges"] = edges;
    j["weights"] = plan.edge_weights;
    return j.dump(2);
}

SelectionPlan plan_from_json(const std::string& text, const std::vector<AttributeDomain>& domains) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("plan: ") + e.what());
    }
    auto index_of = [&](const std::string& name) {
        for (std::size_t a = 0; a < domains.size(); ++a)
            if (domains[a].name == name) return a;
        throw MissingColumn("plan references unknown attribute " + name);
    };
    SelectionPlan plan;
    try {
        for (const auto& name : j.at("one_way")) plan.one_way.push_back({index_of(name)});
        for (const auto& e : j.at("edges")) {
            std::size_t u = index_of(e.at(0).get<std::string>());
            std::size_t v = index_of(e.at(1).get<std::string>());
            if (u > v) std::swap(u, v);
            plan.tree_edges.emplace_back(u, v);
        }
        plan.edge_weights = j.at("weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("plan: ") + e.what());
    }
    if (plan.edge_weights.size() != plan.tree_edges.size())
        throw ShapeMismatch("plan weights do not match edges");
    return plan;
}

} // namespace fairsyn
