// Acceptance suite: runs every contract criterion end to end and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include "fairsyn/audit.hpp"
#include "fairsyn/config.hpp"
#include "fairsyn/errors.hpp"

#include "compas_standin.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace fairsyn;

namespace {

struct Args {
    std::string cli;
    fs::path data_dir;
    fs::path work_dir;
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: fairness measures vs the brute-force counting oracle
// ---------------------------------------------------------------------------

std::array<std::optional<double>, kMeasureCount> oracle_measures(const std::vector<bool>& s,
                                                                 const std::vector<bool>& y,
                                                                 const std::vector<bool>& yh) {
    std::size_t n = s.size();
    auto prob = [&](auto event, auto given) -> std::optional<double> {
        std::size_t num = 0, den = 0;
        for (std::size_t r = 0; r < n; ++r) {
            if (!given(r)) continue;
            ++den;
            if (event(r)) ++num;
        }
        if (den == 0) return std::nullopt;
        return double(num) / double(den);
    };
    auto gap = [](std::optional<double> a, std::optional<double> b) -> std::optional<double> {
        if (!a || !b) return std::nullopt;
        return std::abs(*a - *b);
    };
    std::array<std::optional<double>, kMeasureCount> out;
    auto yes_yh = [&](std::size_t r) { return yh[r]; };
    auto yes_y = [&](std::size_t r) { return y[r]; };
    out[0] = gap(prob(yes_yh, [&](std::size_t r) { return s[r]; }),
                 prob(yes_yh, [&](std::size_t r) { return !s[r]; }));
    out[1] = gap(prob(yes_yh, [&](std::size_t r) { return s[r] && !y[r]; }),
                 prob(yes_yh, [&](std::size_t r) { return !s[r] && !y[r]; }));
    out[2] = gap(prob(yes_yh, [&](std::size_t r) { return s[r] && y[r]; }),
                 prob(yes_yh, [&](std::size_t r) { return !s[r] && y[r]; }));
    out[3] = gap(prob(yes_y, [&](std::size_t r) { return s[r] && yh[r]; }),
                 prob(yes_y, [&](std::size_t r) { return !s[r] && yh[r]; }));
    out[4] = gap(prob([&](std::size_t r) { return !y[r]; },
                      [&](std::size_t r) { return s[r] && !yh[r]; }),
                 prob([&](std::size_t r) { return !y[r]; },
                      [&](std::size_t r) { return !s[r] && !yh[r]; }));
    out[5] = gap(prob([&](std::size_t r) { return y[r] == yh[r]; },
                      [&](std::size_t r) { return s[r]; }),
                 prob([&](std::size_t r) { return y[r] == yh[r]; },
                      [&](std::size_t r) { return !s[r]; }));
    return out;
}

EncodedDatabase sy_database(const std::vector<bool>& s, const std::vector<bool>& y) {
    std::vector<AttributeDomain> domains;
    domains.push_back({"s", DomainKind::categorical, {"0", "1"}, {}, false});
    domains.push_back({"y", DomainKind::categorical, {"0", "1"}, {}, false});
    DatabaseBuilder builder(domains);
    for (std::size_t r = 0; r < s.size(); ++r) builder.add_row({s[r] ? 1u : 0u, y[r] ? 1u : 0u});
    return std::move(builder).build();
}

Outcome criterion_fairness_oracle() {
    double start = now_seconds();
    PredicateSpec sp{"s", PredicateOp::eq, {"1"}};
    PredicateSpec yp{"y", PredicateOp::eq, {"1"}};

    std::size_t checked = 0;
    auto verify = [&](const std::vector<bool>& s, const std::vector<bool>& y,
                      const std::vector<bool>& yh) -> bool {
        PredictionVector preds;
        for (bool b : yh) preds.push_back(b ? 1 : 0);
        auto rep = evaluate(sy_database(s, y), sp, yp, preds);
        auto oracle = oracle_measures(s, y, yh);
        for (std::size_t i = 0; i < kMeasureCount; ++i) {
            if (rep.values[i].has_value() != oracle[i].has_value()) return false;
            if (rep.values[i] && std::abs(*rep.values[i] - *oracle[i]) > 1e-12) return false;
        }
        ++checked;
        return true;
    };

    // Exhaustive: all 2^12 assignments of (S, Y, Yhat) over 4 rows.
    for (unsigned mask = 0; mask < 4096; ++mask) {
        std::vector<bool> s(4), y(4), yh(4);
        for (std::size_t r = 0; r < 4; ++r) {
            s[r] = (mask >> r) & 1;
            y[r] = (mask >> (4 + r)) & 1;
            yh[r] = (mask >> (8 + r)) & 1;
        }
        if (!verify(s, y, yh))
            return {false, "mismatch on exhaustive database mask " + std::to_string(mask)};
    }
    // 1000 random databases of at most 64 rows.
    RandomStream rng(1001, "acceptance/fairness");
    for (int t = 0; t < 1000; ++t) {
        std::size_t n = 1 + rng.next_below(64);
        std::vector<bool> s(n), y(n), yh(n);
        for (std::size_t r = 0; r < n; ++r) {
            s[r] = rng.next_below(2);
            y[r] = rng.next_below(2);
            yh[r] = rng.next_below(2);
        }
        if (!verify(s, y, yh)) return {false, "mismatch on random database " + std::to_string(t)};
    }
    double secs = now_seconds() - start;
    if (secs >= 10.0) return {false, "runtime " + fmt(secs, 1) + " s exceeds 10 s"};
    return {true, std::to_string(checked) + " databases, exact to 1e-12, " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------------------
// criterion 2: spanning-tree weight vs exhaustive enumeration
// ---------------------------------------------------------------------------

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> all_trees(std::size_t d) {
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> trees;
    if (d == 1) return {{}};
    if (d == 2) return {{{0, 1}}};
    std::vector<std::size_t> seq(d - 2, 0);
    while (true) {
        std::vector<int> deg(d, 1);
        for (std::size_t x : seq) ++deg[x];
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t x : seq) {
            for (std::size_t j = 0; j < d; ++j) {
                if (deg[j] == 1) {
                    edges.emplace_back(std::min(j, x), std::max(j, x));
                    --deg[j];
                    --deg[x];
                    break;
                }
            }
        }
        std::size_t u = d, v = d;
        for (std::size_t j = 0; j < d; ++j)
            if (deg[j] == 1) (u == d ? u : v) = j;
        edges.emplace_back(std::min(u, v), std::max(u, v));
        trees.push_back(std::move(edges));
        std::size_t k = seq.size();
        while (k > 0 && seq[k - 1] == d - 1) seq[--k] = 0;
        if (k == 0) break;
        ++seq[k - 1];
    }
    return trees;
}

Outcome criterion_mst_oracle() {
    double start = now_seconds();
    RandomStream rng(2002, "acceptance/mst");
    for (int t = 0; t < 200; ++t) {
        std::size_t d = 2 + rng.next_below(5); // 2..6 attributes
        std::vector<AttributeDomain> domains;
        for (std::size_t a = 0; a < d; ++a) {
            AttributeDomain dom;
            dom.name = "a" + std::to_string(a);
            dom.kind = DomainKind::categorical;
            std::size_t card = 2 + rng.next_below(2);
            for (std::size_t l = 0; l < card; ++l) dom.levels.push_back(std::to_string(l));
            domains.push_back(std::move(dom));
        }
        DatabaseBuilder builder(domains);
        std::size_t rows = 20 + rng.next_below(41);
        std::vector<std::uint32_t> row(d);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t a = 0; a < d; ++a)
                row[a] = static_cast<std::uint32_t>(rng.next_below(domains[a].cardinality()));
            builder.add_row(row);
        }
        auto db = std::move(builder).build();

        auto plan = build_plan(db);
        double plan_weight = 0;
        for (double w : plan.edge_weights) plan_weight += w;

        auto mi = [&](std::size_t u, std::size_t v) {
            std::size_t clique[2] = {u, v};
            return mutual_information(normalize(count_marginal(db, clique)));
        };
        double best = -1e300;
        for (const auto& tree : all_trees(d)) {
            double w = 0;
            for (auto [u, v] : tree) w += mi(u, v);
            best = std::max(best, w);
        }
        if (std::abs(plan_weight - best) > 1e-12)
            return {false, "tree weight " + fmt(plan_weight, 15) + " vs oracle " + fmt(best, 15) +
                               " on trial " + std::to_string(t)};
    }
    double secs = now_seconds() - start;
    if (secs >= 30.0) return {false, "runtime " + fmt(secs, 1) + " s exceeds 30 s"};
    return {true, "200 databases, optimal to 1e-12, " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------------------
// criterion 3: accountant vs closed form and a Monte-Carlo estimate
// ---------------------------------------------------------------------------

Outcome criterion_accountant() {
    RandomStream rng(3003, "acceptance/accountant");
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 1 + rng.next_below(8);
        SelectionPlan plan;
        for (std::size_t a = 0; a < d; ++a) plan.one_way.push_back({a});
        for (std::size_t a = 1; a < d; ++a) {
            plan.tree_edges.emplace_back(a - 1, a);
            plan.edge_weights.push_back(0.0);
        }
        std::vector<AttributeDomain> domains;
        for (std::size_t a = 0; a < d; ++a)
            domains.push_back({"a" + std::to_string(a), DomainKind::categorical, {"0", "1"}, {}, false});

        double rho = 0.01 + rng.next_double() * 3.0;
        double alpha = 1.0 + rng.next_double() * 30.0;
        auto alloc = allocate(rho, plan, domains);

        // Each measurement's two neighboring views are unit-sensitivity
        // Gaussians; composition sums the per-measurement divergences.
        double composed = 0.0;
        for (const auto& share : alloc.shares) {
            std::vector<double> zero{0.0}, unit{1.0};
            composed += renyi_divergence_gaussian(zero, unit, share.sigma, std::max(alpha, 1.0 + 1e-12));
        }
        if (std::abs(rdp_curve(alloc, alpha) - composed) > 1e-9)
            return {false, "closed-form mismatch on allocation " + std::to_string(t)};
    }

    // Monte-Carlo importance-sampled estimate of D_alpha(N(1,s^2) || N(0,s^2))
    // at alpha = 2, proposal N(1, (2s)^2).
    for (double sigma : {0.5, 1.0, 2.0}) {
        const double alpha = 2.0;
        std::vector<double> mu1{1.0}, mu2{0.0};
        double closed = renyi_divergence_gaussian(mu1, mu2, sigma, alpha);

        RandomStream mc(4004, "acceptance/mc-" + fmt(sigma, 1));
        const std::size_t n = 2000000;
        const double prop_sigma = 2.0 * sigma;
        auto log_normal = [](double x, double mu, double s) {
            double z = (x - mu) / s;
            return -0.5 * z * z - std::log(s) - 0.5 * std::log(2.0 * 3.14159265358979323846);
        };
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = 1.0 + mc.next_gaussian(prop_sigma);
            double lw = alpha * log_normal(x, 1.0, sigma) + (1.0 - alpha) * log_normal(x, 0.0, sigma) -
                        log_normal(x, 1.0, prop_sigma);
            mean += std::exp(lw);
        }
        mean /= double(n);
        double estimate = std::log(mean) / (alpha - 1.0);
        double rel = std::abs(estimate - closed) / closed;
        if (rel > 0.05)
            return {false, "sigma " + fmt(sigma, 1) + ": MC " + fmt(estimate) + " vs closed " +
                               fmt(closed) + " (rel " + fmt(rel) + ")"};
    }
    return {true, "100 allocations to 1e-9; MC within 5% at sigma {0.5, 1, 2}"};
}

// ---------------------------------------------------------------------------
// criterion 4: zero-noise fidelity and sampling convergence
// ---------------------------------------------------------------------------

Outcome criterion_zero_noise() {
    // 4-attribute fixture with dependence.
    std::vector<AttributeDomain> domains;
    domains.push_back({"a", DomainKind::categorical, {"0", "1"}, {}, false});
    domains.push_back({"b", DomainKind::categorical, {"0", "1", "2"}, {}, false});
    domains.push_back({"c", DomainKind::categorical, {"0", "1"}, {}, false});
    domains.push_back({"d", DomainKind::categorical, {"0", "1", "2", "3"}, {}, false});
    DatabaseBuilder builder(domains);
    RandomStream gen(4040, "acceptance/fixture");
    for (int r = 0; r < 2000; ++r) {
        std::uint32_t a = static_cast<std::uint32_t>(gen.next_below(2));
        std::uint32_t b = static_cast<std::uint32_t>((a + gen.next_below(2)) % 3);
        std::uint32_t c = gen.next_double() < (b == 0 ? 0.3 : 0.7) ? 1 : 0;
        std::uint32_t d = static_cast<std::uint32_t>((2 * c + gen.next_below(3)) % 4);
        builder.add_row({a, b, c, d});
    }
    auto db = std::move(builder).build();

    FitOptions opts;
    opts.testing_mode = true;
    opts.master_seed = 11;
    auto artifacts = fit_pipeline(db, opts);

    std::vector<std::vector<std::size_t>> cliques;
    for (const auto& ow : artifacts.plan.one_way) cliques.push_back(ow);
    for (auto [u, v] : artifacts.plan.tree_edges) cliques.push_back({u, v});

    for (const auto& clique : cliques) {
        auto expected = normalize(count_marginal(db, clique));
        auto got = model_marginal(artifacts.model, clique);
        for (std::size_t i = 0; i < expected.table.size(); ++i)
            if (std::abs(got.table[i] - expected.table[i]) > 1e-9)
                return {false, "model marginal differs from empirical beyond 1e-9"};
    }

    RandomStream rng(11, "replicate/0");
    auto synth = sample(artifacts.model, 200000, rng);
    double worst = 0.0;
    for (const auto& clique : cliques) {
        auto expected = model_marginal(artifacts.model, clique);
        auto got = normalize(count_marginal(synth, clique));
        worst = std::max(worst, total_variation(got.table, expected.table));
    }
    if (worst > 0.01)
        return {false, "200k-sample total variation " + fmt(worst, 5) + " exceeds 0.01"};
    return {true, "exact marginals to 1e-9; 200k-sample worst TV " + fmt(worst, 5)};
}

// ---------------------------------------------------------------------------
// criterion 5: desk-scale reproduction on the COMPAS two-year data
// ---------------------------------------------------------------------------

Outcome criterion_compas(const Args& args) {
    fs::path schema_path = args.data_dir / "compas_schema.json";
    if (!fs::exists(schema_path)) return {false, "bundled schema missing: " + schema_path.string()};

    fs::path csv = args.data_dir / "compas-scores-two-years.csv";
    bool real_data = fs::exists(csv);
    if (!real_data) {
        csv = args.work_dir / "compas_standin.csv";
        acceptance::write_compas_standin(csv);
    }

    auto domains = load_schema(schema_path);
    auto db = encode_csv(csv, domains);
    std::size_t rows = db.row_count();

    AuditRequest req;
    req.protected_group = {"sex", PredicateOp::eq, {"Female"}};
    req.ground_truth = {"two_year_recid", PredicateOp::eq, {"1"}};
    req.builtin = PredictorConfig{};
    req.fit.rho_total = epsilon_delta_to_rho(1.0, 1e-6); // the epsilon = 1 convention
    req.fit.master_seed = 20240501;
    req.replicates = 100;

    double fit_start = now_seconds();
    auto artifacts = fit_pipeline(db, req.fit);
    double fit_secs = now_seconds() - fit_start;
    (void)artifacts;

    auto cmp = run_audit(std::move(db), req);
    if (!cmp.average_difference) return {false, "average difference undefined"};

    std::string detail = "average difference " + fmt(*cmp.average_difference) + " (<= 0.1), fit " +
                         fmt(fit_secs, 3) + " s (<= 60), rho " + fmt(req.fit.rho_total, 5) + ", " +
                         std::to_string(rows) + " rows, 100 replicates, " +
                         (real_data ? "public two-year CSV" : "generated stand-in (real CSV not fetched)");
    if (*cmp.average_difference > 0.1) return {false, detail};
    if (fit_secs > 60.0) return {false, detail};
    return {true, detail};
}

// ---------------------------------------------------------------------------
// criterion 6: published-table arithmetic
// ---------------------------------------------------------------------------

Outcome criterion_table_arithmetic() {
    std::vector<std::optional<double>> column = {0.1818, 0.0080, 0.0115, 0.0189, 0.1626, 0.0803};
    auto avg = mean_of_defined(column);
    if (!avg) return {false, "aggregator returned undefined"};
    std::string rounded = fmt(*avg);
    std::string detail = "aggregator mean " + fmt(*avg, 7) + " -> " + rounded +
                         " at 4 decimals; required caption value 0.0775";
    if (rounded != "0.0775")
        return {false, detail + " (the published caption disagrees with its own column: the six "
                                "differences sum to 0.4631 and 0.4631/6 rounds to 0.0772, so the "
                                "required value is unreachable by the defined aggregation)"};
    return {true, detail};
}

// ---------------------------------------------------------------------------
// criterion 7: predictor gradient vs central finite differences
// ---------------------------------------------------------------------------

Outcome criterion_gradient() {
    RandomStream rng(7007, "acceptance/gradient");
    for (int t = 0; t < 50; ++t) {
        std::size_t d = 2 + rng.next_below(3);
        std::vector<AttributeDomain> domains;
        for (std::size_t a = 0; a <= d; ++a) {
            AttributeDomain dom;
            dom.name = "f" + std::to_string(a);
            dom.kind = DomainKind::categorical;
            std::size_t card = 2 + rng.next_below(2);
            for (std::size_t l = 0; l < card; ++l) dom.levels.push_back(std::to_string(l));
            domains.push_back(std::move(dom));
        }
        DatabaseBuilder builder(domains);
        std::size_t rows = 10 + rng.next_below(40);
        std::vector<std::uint32_t> row(d + 1);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t a = 0; a <= d; ++a)
                row[a] = static_cast<std::uint32_t>(rng.next_below(domains[a].cardinality()));
            builder.add_row(row);
        }
        auto db = std::move(builder).build();
        std::vector<std::uint8_t> labels(rows);
        for (auto& l : labels) l = static_cast<std::uint8_t>(rng.next_below(2));

        LogisticModel model;
        std::size_t offset = 0;
        for (std::size_t a = 0; a < d; ++a) {
            model.layout.push_back({domains[a].name, domains[a].cardinality(), offset});
            offset += domains[a].cardinality();
        }
        model.weights.resize(offset);
        for (auto& w : model.weights) w = rng.next_gaussian(1.5);
        model.bias = rng.next_gaussian(1.5);

        std::vector<double> grad;
        double grad_b = 0.0;
        logistic_gradient(model, db, labels, grad, grad_b);

        const double h = 1e-5;
        double err_sq = 0.0, norm_sq = 0.0;
        for (std::size_t i = 0; i <= model.weights.size(); ++i) {
            LogisticModel up = model, down = model;
            if (i < model.weights.size()) {
                up.weights[i] += h;
                down.weights[i] -= h;
            } else {
                up.bias += h;
                down.bias -= h;
            }
            double fd = (logistic_loss(up, db, labels) - logistic_loss(down, db, labels)) / (2 * h);
            double an = i < model.weights.size() ? grad[i] : grad_b;
            err_sq += (fd - an) * (fd - an);
            norm_sq += an * an;
        }
        double rel = std::sqrt(err_sq) / std::max(1.0, std::sqrt(norm_sq));
        if (rel > 1e-5)
            return {false, "relative error " + fmt(rel, 8) + " on instance " + std::to_string(t)};
    }
    return {true, "50 instances within 1e-5 relative error"};
}

// ---------------------------------------------------------------------------
// criteria 8 and 9: CLI determinism and the per-category diagnostic
// ---------------------------------------------------------------------------

int run_cli(const Args& args, const std::string& rest, const fs::path& log) {
    std::string cmd = args.cli + " " + rest + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path write_small_config(const Args& args) {
    fs::path dir = args.work_dir / "cli";
    fs::create_directories(dir);
    spit(dir / "schema.json", R"({
  "attributes": [
    {"name": "s", "kind": "categorical", "levels": ["no", "yes"]},
    {"name": "x", "kind": "categorical", "levels": ["a", "b", "c"]},
    {"name": "y", "kind": "categorical", "levels": ["0", "1"]}
  ]
})");
    std::string csv = "s,x,y\n";
    RandomStream rng(88, "acceptance/cli-data");
    for (int i = 0; i < 300; ++i) {
        bool s = rng.next_double() < 0.4;
        double u = rng.next_double();
        char x = s ? (u < 0.5 ? 'a' : u < 0.8 ? 'b' : 'c') : (u < 0.2 ? 'a' : u < 0.5 ? 'b' : 'c');
        bool y = rng.next_double() < (x == 'c' ? 0.8 : x == 'b' ? 0.5 : 0.2);
        csv += std::string(s ? "yes" : "no") + "," + x + "," + (y ? "1" : "0") + "\n";
    }
    spit(dir / "data.csv", csv);
    spit(dir / "config.json", R"({
  "schema": "schema.json",
  "data": "data.csv",
  "protected": {"attribute": "s", "op": "eq", "value": "yes"},
  "ground_truth": {"attribute": "y", "op": "eq", "value": "1"},
  "predictor": {"type": "builtin", "iterations": 120},
  "budget": {"rho": 0.5},
  "replicates": 8,
  "seed": 4242
})");
    return dir / "config.json";
}

Outcome criterion_determinism(const Args& args) {
    if (args.cli.empty()) return {false, "--cli not given"};
    fs::path config = write_small_config(args);
    fs::path out_a = args.work_dir / "cli" / "out_a";
    fs::path out_b = args.work_dir / "cli" / "out_b";

    int rc_a = run_cli(args, "audit --config " + config.string() + " --out " + out_a.string(),
                       args.work_dir / "cli" / "a.log");
    int rc_b = run_cli(args, "audit --config " + config.string() + " --out " + out_b.string(),
                       args.work_dir / "cli" / "b.log");
    if (rc_a != 0 || rc_b != 0)
        return {false, "audit exit codes " + std::to_string(rc_a) + "/" + std::to_string(rc_b)};

    const char* names[] = {"comparison.json", "comparison.txt", "original_report.json",
                           "plan.json",       "accountant.json", "model.json"};
    for (const char* name : names) {
        std::string a = slurp(out_a / name), b = slurp(out_b / name);
        if (a.empty()) return {false, std::string(name) + " missing or empty"};
        if (a != b) return {false, std::string(name) + " differs between identical-seed runs"};
    }
    return {true, "6 artifacts byte-identical across two cmd_audit runs, seed 4242"};
}

Outcome criterion_category_diagnostic(const Args& args) {
    fs::path report = args.work_dir / "cli" / "out_a" / "comparison.json";
    if (!fs::exists(report)) return {false, "comparison.json not found (criterion 8 must run first)"};
    std::string text = slurp(report);
    for (const char* key : {"per_category_error", "independence", "separation", "sufficiency"})
        if (text.find(key) == std::string::npos)
            return {false, std::string("report lacks ") + key};
    // Observational: surface the values so the sufficiency gap can be read off.
    auto grab = [&](const std::string& key) {
        auto pos = text.find("\"" + key + "\":", text.find("per_category_error"));
        if (pos == std::string::npos) return std::string("?");
        auto start = text.find_first_not_of(" ", pos + key.size() + 3);
        auto end = text.find_first_of(",\n}", start);
        return text.substr(start, end - start);
    };
    return {true, "per-category error emitted: independence " + grab("independence") +
                      ", separation " + grab("separation") + ", sufficiency " + grab("sufficiency") +
                      ", n/a " + grab("n/a") + " (observational)"};
}

} // namespace

int main(int argc, char** argv) {
    Args args;
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string flag = argv[i];
        if (flag == "--cli") args.cli = argv[i + 1];
        else if (flag == "--data") args.data_dir = argv[i + 1];
        else if (flag == "--work") args.work_dir = argv[i + 1];
    }
    if (args.work_dir.empty()) args.work_dir = fs::temp_directory_path() / "fairsyn_acceptance";
    fs::create_directories(args.work_dir);

    struct Entry {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    const Entry entries[] = {
        {1, "fairness-oracle equivalence", [] { return criterion_fairness_oracle(); }},
        {2, "MI/MST oracle equivalence", [] { return criterion_mst_oracle(); }},
        {3, "accountant correctness", [] { return criterion_accountant(); }},
        {4, "zero-noise fidelity", [] { return criterion_zero_noise(); }},
        {5, "paper-number reproduction (desk scale)", [&] { return criterion_compas(args); }},
        {6, "table-arithmetic reproduction", [] { return criterion_table_arithmetic(); }},
        {7, "gradient check", [] { return criterion_gradient(); }},
        {8, "determinism", [&] { return criterion_determinism(args); }},
        {9, "sufficiency-gap diagnostic", [&] { return criterion_category_diagnostic(args); }},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        Outcome outcome;
        try {
            outcome = entry.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] %d. %s — %s\n", outcome.pass ? "PASS" : "FAIL", entry.id, entry.title,
                    outcome.detail.c_str());
        std::fflush(stdout);
    }
    if (failures) std::printf("%d of 9 criteria failed\n", failures);
    else std::printf("all 9 criteria passed\n");
    return failures == 0 ? 0 : 1;
}
