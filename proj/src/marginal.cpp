#include "fairsyn/marginal.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace fairsyn {

namespace {

void check_clique(std::span<const std::size_t> clique, std::size_t attr_count) {
    if (clique.empty()) throw BadClique("empty clique");
    std::unordered_set<std::size_t> seen;
    for (std::size_t a : clique) {
        if (a >= attr_count) throw BadClique("attribute index " + std::to_string(a) + " out of range");
        if (!seen.insert(a).second) throw BadClique("duplicate attribute index " + std::to_string(a));
    }
}

} // namespace

std::size_t Marginal::flat_index(std::span<const std::size_t> coords) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) idx = idx * shape[k] + coords[k];
    return idx;
}

double Marginal::total() const {
    return std::accumulate(table.begin(), table.end(), 0.0);
}

Marginal count_marginal(const EncodedDatabase& db, std::span<const std::size_t> clique) {
    check_clique(clique, db.attribute_count());
    Marginal m;
    m.clique.assign(clique.begin(), clique.end());
    m.shape.reserve(clique.size());
    std::size_t cells = 1;
    for (std::size_t a : clique) {
        std::size_t card = db.domains()[a].cardinality();
        m.shape.push_back(card);
        cells *= card;
    }
    m.table.assign(cells, 0.0);
    for (std::size_t r = 0; r < db.row_count(); ++r) {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < clique.size(); ++k)
            idx = idx * m.shape[k] + db.code(r, clique[k]);
        m.table[idx] += 1.0;
    }
    return m;
}

Marginal project(const Marginal& m, std::span<const std::size_t> sub_clique) {
    if (sub_clique.empty()) throw BadClique("empty sub-clique");
    // Position of each surviving attribute within m.clique.
    std::vector<std::size_t> pos;
    pos.reserve(sub_clique.size());
    for (std::size_t a : sub_clique) {
        auto it = std::find(m.clique.begin(), m.clique.end(), a);
        if (it == m.clique.end())
            throw BadClique("attribute " + std::to_string(a) + " not in source clique");
        pos.push_back(static_cast<std::size_t>(it - m.clique.begin()));
    }
    std::unordered_set<std::size_t> uniq(pos.begin(), pos.end());
    if (uniq.size() != pos.size()) throw BadClique("duplicate attribute in sub-clique");

    Marginal out;
    out.clique.assign(sub_clique.begin(), sub_clique.end());
    out.normalized = m.normalized;
    std::size_t cells = 1;
    for (std::size_t p : pos) {
        out.shape.push_back(m.shape[p]);
        cells *= m.shape[p];
    }
    out.table.assign(cells, 0.0);

    std::vector<std::size_t> coords(m.shape.size(), 0);
    for (std::size_t idx = 0; idx < m.table.size(); ++idx) {
        std::size_t oidx = 0;
        for (std::size_t k = 0; k < pos.size(); ++k) oidx = oidx * out.shape[k] + coords[pos[k]];
        out.table[oidx] += m.table[idx];
        for (std::size_t k = m.shape.size(); k-- > 0;) {
            if (++coords[k] < m.shape[k]) break;
            coords[k] = 0;
        }
    }
    return out;
}

double l1_error(const Marginal& a, const Marginal& b) {
    if (a.clique != b.clique || a.shape != b.shape)
        throw ShapeMismatch("marginals differ in clique or shape");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.table.size(); ++i) sum += std::abs(a.table[i] - b.table[i]);
    return sum;
}

Marginal normalize(const Marginal& m) {
    double t = m.total();
    if (!(t > 0.0)) throw DomainError("cannot normalize a marginal with non-positive total mass");
    Marginal out = m;
    for (double& v : out.table) v /= t;
    out.normalized = true;
    return out;
}

Marginal clamp_normalize(const Marginal& m) {
    Marginal out = m;
    double total = 0.0;
    for (double& v : out.table) {
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (total <= 0.0) {
        std::fill(out.table.begin(), out.table.end(), 1.0 / static_cast<double>(out.table.size()));
    } else {
        for (double& v : out.table) v /= total;
    }
    out.normalized = true;
    return out;
}

std::string marginal_to_json(const Marginal& m, const std::vector<AttributeDomain>& domains) {
    nlohmann::json j;
    std::vector<std::string> names;
    for (std::size_t a : m.clique) {
        if (a >= domains.size()) throw BadClique("clique index out of range for domain list");
        names.push_back(domains[a].name);
    }
    j["clique"] = names;
    j["shape"] = m.shape;
    j["table"] = m.table;
    j["normalized"] = m.normalized;
    return j.dump(2);
}

Marginal marginal_from_json(const std::string& text, const std::vector<AttributeDomain>& domains) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("marginal: ") + e.what());
    }
    Marginal m;
    try {
        for (const auto& name : j.at("clique")) {
            std::size_t idx = domains.size();
            for (std::size_t a = 0; a < domains.size(); ++a)
                if (domains[a].name == name.get<std::string>()) idx = a;
            if (idx == domains.size()) throw BadClique("unknown attribute in marginal clique");
            m.clique.push_back(idx);
        }
        m.shape = j.at("shape").get<std::vector<std::size_t>>();
        m.table = j.at("table").get<std::vector<double>>();
        m.normalized = j.value("normalized", false);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("marginal: ") + e.what());
    }
    std::size_t cells = 1;
    for (std::size_t s : m.shape) cells *= s;
    if (m.table.size() != cells || m.clique.size() != m.shape.size())
        throw ShapeMismatch("marginal JSON is internally inconsistent");
    return m;
}

} // namespace fairsyn
