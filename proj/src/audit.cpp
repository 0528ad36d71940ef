#include "fairsyn/audit.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

namespace fairsyn {

namespace {

// Row order of the reference report tables.
constexpr std::array<FairnessMeasure, kMeasureCount> kTableOrder = {
    FairnessMeasure::demographic_parity,
    FairnessMeasure::overall_accuracy,
    FairnessMeasure::equalized_odds_fp,
    FairnessMeasure::equalized_odds_tp,
    FairnessMeasure::cond_use_accuracy_tp,
    FairnessMeasure::cond_use_accuracy_tn,
};

void run_indexed(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<NoisyMeasurement> measure_marginals(const EncodedDatabase& db, const SelectionPlan& plan,
                                                const std::vector<MeasurementShare>& shares,
                                                std::uint64_t master_seed, bool testing_mode) {
    (void)plan;
    std::vector<NoisyMeasurement> out;
    out.reserve(shares.size());
    for (const auto& share : shares) {
        Marginal m = count_marginal(db, share.clique);
        RandomStream rng(master_seed, "measure/" + share.id);
        out.push_back(gaussian_mechanism(m, testing_mode ? 0.0 : share.sigma, rng));
    }
    return out;
}

// Shares for testing mode: same cliques, sigma pinned to 0.
std::vector<MeasurementShare> zero_noise_shares(const SelectionPlan& plan,
                                                const std::vector<AttributeDomain>& domains) {
    std::vector<MeasurementShare> shares;
    for (const auto& ow : plan.one_way)
        shares.push_back({"1way/" + domains.at(ow[0]).name, ow, 0.0, 0.0});
    for (const auto& [u, v] : plan.tree_edges)
        shares.push_back({"edge/" + domains.at(u).name + "," + domains.at(v).name, {u, v}, 0.0, 0.0});
    return shares;
}

} // namespace

PipelineArtifacts fit_pipeline(const EncodedDatabase& db, const FitOptions& options) {
    const auto& domains = db.domains();
    std::size_t d = domains.size();
    PipelineArtifacts out;

    std::vector<MeasurementShare> selection_shares;
    if (options.noisy_selection_rho && !options.testing_mode) {
        // MI from Gaussian-noised pairwise marginals; the cost is accounted.
        double rho_sel = *options.noisy_selection_rho;
        if (!(rho_sel > 0.0)) throw NonPositiveBudget("selection rho must be positive");
        std::size_t n_pairs = d * (d - 1) / 2;
        if (n_pairs == 0) throw EmptyDatabase("noisy selection needs at least two attributes");
        double rho_pair = rho_sel / static_cast<double>(n_pairs);
        double sigma = std::sqrt(1.0 / (2.0 * rho_pair));
        std::vector<Marginal> joints;
        joints.reserve(n_pairs);
        for (std::size_t u = 0; u < d; ++u) {
            for (std::size_t v = u + 1; v < d; ++v) {
                std::string id = "select/" + domains[u].name + "," + domains[v].name;
                std::size_t clique[2] = {u, v};
                RandomStream rng(options.master_seed, "measure/" + id);
                NoisyMeasurement nm = gaussian_mechanism(count_marginal(db, clique), sigma, rng);
                joints.push_back(clamp_normalize(nm.marginal));
                selection_shares.push_back({id, {u, v}, rho_pair, sigma});
            }
        }
        out.plan = build_plan_from_joints(d, joints);
        if (options.force_edge) {
            std::size_t u = db.attribute_index(options.force_edge->first);
            std::size_t v = db.attribute_index(options.force_edge->second);
            if (u > v) std::swap(u, v);
            std::size_t k = 0, idx = 0;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i + 1; j < d; ++j, ++k)
                    if (i == u && j == v) idx = k;
            force_edge(out.plan, u, v, mutual_information(joints[idx]));
        }
        out.accountant_notes.push_back(
            "selection: mutual information computed from noised pairwise marginals; cost accounted");
    } else {
        out.plan = build_plan(db);
        if (options.force_edge) {
            std::size_t u = db.attribute_index(options.force_edge->first);
            std::size_t v = db.attribute_index(options.force_edge->second);
            if (u > v) std::swap(u, v);
            std::size_t clique[2] = {u, v};
            double w = mutual_information(normalize(count_marginal(db, clique)));
            force_edge(out.plan, u, v, w);
        }
        out.accountant_notes.push_back(
            "selection: mutual information computed on the raw data; its privacy cost is not "
            "accounted (known gap)");
    }
    if (options.force_edge)
        out.accountant_notes.push_back("force_edge: (" + options.force_edge->first + "," +
                                       options.force_edge->second +
                                       ") swapped into the tree; extension beyond the base method");

    std::vector<MeasurementShare> shares;
    if (options.testing_mode) {
        shares = zero_noise_shares(out.plan, domains);
        out.accountant_notes.push_back("testing_mode: sigma = 0 on every measurement; rho not applicable");
    } else {
        BudgetAllocation alloc = allocate(options.rho_total, out.plan, domains);
        for (const auto& s : selection_shares) {
            alloc.shares.push_back(s);
            alloc.rho_total += s.rho;
        }
        shares = alloc.shares;
        out.allocation = std::move(alloc);
    }

    auto measurements = measure_marginals(db, out.plan, shares, options.master_seed,
                                          options.testing_mode);
    out.model = fit(measurements, out.plan, domains);
    out.model.default_rows = db.row_count();
    return out;
}

std::optional<double> mean_of_defined(const std::vector<std::optional<double>>& values) {
    std::vector<double> defined;
    defined.reserve(values.size());
    for (const auto& v : values)
        if (v) defined.push_back(*v);
    if (defined.empty()) return std::nullopt;
    std::sort(defined.begin(), defined.end());
    double sum = 0.0;
    for (double v : defined) sum += v;
    return sum / static_cast<double>(defined.size());
}

namespace {

AuditComparison aggregate(FairnessReport original, std::vector<FairnessReport> replicate_reports,
                          const AuditRequest& request, PipelineArtifacts artifacts) {
    AuditComparison cmp;
    cmp.original = std::move(original);
    cmp.replicate_reports = std::move(replicate_reports);
    cmp.replicates = cmp.replicate_reports.size();
    cmp.master_seed = request.fit.master_seed;
    cmp.testing_mode = request.fit.testing_mode;
    // Only a fit that actually spent budget reports one.
    if (artifacts.allocation) cmp.rho_total = artifacts.allocation->rho_total;
    cmp.artifacts = std::move(artifacts);

    for (std::size_t i = 0; i < kMeasureCount; ++i) {
        MeasureAggregate& agg = cmp.measures[i];
        agg.original = cmp.original.values[i];
        std::vector<std::optional<double>> replicate_values;
        replicate_values.reserve(cmp.replicates);
        for (const auto& rep : cmp.replicate_reports) replicate_values.push_back(rep.values[i]);
        agg.synthetic_mean = mean_of_defined(replicate_values);
        for (const auto& v : replicate_values)
            v ? ++agg.defined_replicates : ++agg.undefined_replicates;
        if (agg.original && cmp.replicates > 0 && !agg.synthetic_mean)
            throw AllReplicatesUndefined(std::string(measure_name(static_cast<FairnessMeasure>(i))) +
                                         " is undefined in every replicate");
        if (agg.original && agg.synthetic_mean)
            agg.difference = std::abs(*agg.original - *agg.synthetic_mean);
    }

    std::vector<std::optional<double>> diffs;
    for (const auto& agg : cmp.measures) diffs.push_back(agg.difference);
    cmp.average_difference = mean_of_defined(diffs);
    cmp.per_category_error = category_error_summary(cmp);
    return cmp;
}

} // namespace

AuditComparison run_audit(EncodedDatabase db, const AuditRequest& request) {
    if (request.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (request.builtin.has_value() == request.external_predictions.has_value())
        throw ConfigError("exactly one prediction source is required");
    if (request.external_predictions)
        throw ConfigError("external predictions cover the original rows only; use compare_audit "
                          "with pre-generated synthetic sets");

    PipelineArtifacts artifacts = fit_pipeline(db, request.fit);

    // Compile against the shared domain list; replicates reuse these.
    CompiledPredicate s = compile_predicate(request.protected_group, db.domains());
    CompiledPredicate y = compile_predicate(request.ground_truth, db.domains());

    LogisticModel predictor = train(db, request.ground_truth, *request.builtin);
    FairnessReport original_report = evaluate(db, s, y, predict(predictor, db));

    std::size_t synthetic_rows = request.synthetic_rows.value_or(db.row_count());
    db = EncodedDatabase(); // the framework's discard step: original data released

    std::vector<FairnessReport> replicate_reports(request.replicates);
    const TreeModel& model = artifacts.model;
    run_indexed(request.replicates, request.threads, [&](std::size_t r) {
        RandomStream rng(request.fit.master_seed, "replicate/" + std::to_string(r));
        EncodedDatabase synth = sample(model, synthetic_rows, rng);
        PredictionVector preds = request.retrain_per_replicate
                                     ? predict(train(synth, request.ground_truth, *request.builtin), synth)
                                     : predict(predictor, synth);
        replicate_reports[r] = evaluate(synth, s, y, preds);
    });

    return aggregate(std::move(original_report), std::move(replicate_reports), request,
                     std::move(artifacts));
}

AuditComparison compare_audit(EncodedDatabase db, const AuditRequest& request,
                              const std::vector<EncodedDatabase>& synthetic_sets,
                              const std::vector<PredictionVector>& synthetic_predictions) {
    if (synthetic_sets.empty()) throw ConfigError("compare needs at least one synthetic set");
    if (request.builtin.has_value() == request.external_predictions.has_value())
        throw ConfigError("exactly one prediction source is required");
    if (request.external_predictions && synthetic_predictions.size() != synthetic_sets.size())
        throw ConfigError("external predictions require one prediction file per synthetic set");

    CompiledPredicate s = compile_predicate(request.protected_group, db.domains());
    CompiledPredicate y = compile_predicate(request.ground_truth, db.domains());

    std::optional<LogisticModel> predictor;
    FairnessReport original_report;
    if (request.builtin) {
        predictor = train(db, request.ground_truth, *request.builtin);
        original_report = evaluate(db, s, y, predict(*predictor, db));
    } else {
        original_report = evaluate(db, s, y, *request.external_predictions);
    }
    db = EncodedDatabase();

    std::vector<FairnessReport> replicate_reports(synthetic_sets.size());
    run_indexed(synthetic_sets.size(), request.threads, [&](std::size_t r) {
        const EncodedDatabase& synth = synthetic_sets[r];
        PredictionVector preds;
        if (request.builtin) {
            preds = request.retrain_per_replicate
                        ? predict(train(synth, request.ground_truth, *request.builtin), synth)
                        : predict(*predictor, synth);
        } else {
            preds = synthetic_predictions[r];
        }
        replicate_reports[r] = evaluate(synth, s, y, preds);
    });

    AuditRequest effective = request;
    effective.replicates = synthetic_sets.size();
    return aggregate(std::move(original_report), std::move(replicate_reports), effective, {});
}

std::array<std::optional<double>, 4> category_error_summary(const AuditComparison& cmp) {
    std::array<std::vector<std::optional<double>>, 4> buckets;
    for (std::size_t i = 0; i < kMeasureCount; ++i) {
        auto cat = static_cast<std::size_t>(category_of(static_cast<FairnessMeasure>(i)));
        buckets[cat].push_back(cmp.measures[i].difference);
    }
    std::array<std::optional<double>, 4> out;
    for (std::size_t c = 0; c < 4; ++c) out[c] = mean_of_defined(buckets[c]);
    return out;
}

namespace {

nlohmann::json opt_to_json(const std::optional<double>& v) {
    if (v) return *v;
    return "undefined";
}

nlohmann::json report_json_fragment(const FairnessReport& rep) {
    nlohmann::json j;
    nlohmann::json measures;
    for (std::size_t i = 0; i < kMeasureCount; ++i)
        measures[std::string(measure_name(static_cast<FairnessMeasure>(i)))] =
            opt_to_json(rep.values[i]);
    j["measures"] = std::move(measures);
    j["contingency"] = rep.contingency;
    j["row_count"] = rep.row_count;
    return j;
}

} // namespace

std::string comparison_to_json(const AuditComparison& cmp) {
    nlohmann::json j;
    j["master_seed"] = cmp.master_seed;
    j["replicates"] = cmp.replicates;
    auto streams = nlohmann::json::array();
    for (std::size_t r = 0; r < cmp.replicates; ++r) streams.push_back("replicate/" + std::to_string(r));
    j["replicate_streams"] = std::move(streams);
    j["testing_mode"] = cmp.testing_mode;
    if (cmp.rho_total) j["rho_total"] = *cmp.rho_total;
    j["original"] = report_json_fragment(cmp.original);

    nlohmann::json measures;
    for (std::size_t i = 0; i < kMeasureCount; ++i) {
        auto m = static_cast<FairnessMeasure>(i);
        const MeasureAggregate& agg = cmp.measures[i];
        nlohmann::json entry;
        entry["category"] = category_name(category_of(m));
        entry["original"] = opt_to_json(agg.original);
        entry["synthetic_mean"] = opt_to_json(agg.synthetic_mean);
        entry["difference"] = opt_to_json(agg.difference);
        entry["defined_replicates"] = agg.defined_replicates;
        entry["undefined_replicates"] = agg.undefined_replicates;
        measures[std::string(measure_name(m))] = std::move(entry);
    }
    j["measures"] = std::move(measures);
    j["average_difference"] = opt_to_json(cmp.average_difference);

    nlohmann::json cats;
    cats["independence"] = opt_to_json(cmp.per_category_error[0]);
    cats["separation"] = opt_to_json(cmp.per_category_error[1]);
    cats["sufficiency"] = opt_to_json(cmp.per_category_error[2]);
    cats["n/a"] = opt_to_json(cmp.per_category_error[3]);
    j["per_category_error"] = std::move(cats);

    auto reps = nlohmann::json::array();
    for (const auto& rep : cmp.replicate_reports) reps.push_back(report_json_fragment(rep));
    j["replicate_reports"] = std::move(reps);
    return j.dump(2);
}

namespace {

std::string fmt4(const std::optional<double>& v) {
    if (!v) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *v);
    return buf;
}

} // namespace

std::string comparison_to_table(const AuditComparison& cmp) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-52s%12s%12s%12s\n", "Measure", "Original", "Synthetic",
                  "Difference");
    out += line;
    for (FairnessMeasure m : kTableOrder) {
        const MeasureAggregate& agg = cmp.measures[static_cast<std::size_t>(m)];
        std::snprintf(line, sizeof(line), "%-52s%12s%12s%12s\n",
                      std::string(measure_name(m)).c_str(), fmt4(agg.original).c_str(),
                      fmt4(agg.synthetic_mean).c_str(), fmt4(agg.difference).c_str());
        out += line;
    }
    out += "Average difference is " + fmt4(cmp.average_difference) + ".\n";

    out += "Per-category error: independence " + fmt4(cmp.per_category_error[0]) +
           ", separation " + fmt4(cmp.per_category_error[1]) + ", sufficiency " +
           fmt4(cmp.per_category_error[2]) + ", n/a " + fmt4(cmp.per_category_error[3]) + ".\n";
    return out;
}

} // namespace fairsyn
