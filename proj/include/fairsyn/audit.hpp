#pragma once

#include "fairsyn/dataset.hpp"
#include "fairsyn/fairness.hpp"
#include "fairsyn/model.hpp"
#include "fairsyn/predictor.hpp"
#include "fairsyn/privacy.hpp"
#include "fairsyn/select.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fairsyn {

// Options for the select-measure-fit stage.
struct FitOptions {
    double rho_total = 1.0;
    bool testing_mode = false; // sigma = 0 on every measurement
    std::uint64_t master_seed = 0;
    std::optional<std::pair<std::string, std::string>> force_edge;
    // When set, pairwise mutual information is computed from Gaussian-noised
    // pairwise marginals with this extra budget, and the cost is accounted.
    std::optional<double> noisy_selection_rho;
};

struct PipelineArtifacts {
    SelectionPlan plan;
    std::optional<BudgetAllocation> allocation; // nullopt in testing mode
    TreeModel model;
    std::vector<std::string> accountant_notes;
};

// select + measure + fit. The only statistics that leave this call are the
// Gaussian-noised measurements baked into the model (unless testing_mode or
// noisy-selection notes say otherwise).
PipelineArtifacts fit_pipeline(const EncodedDatabase& db, const FitOptions& options);

struct AuditRequest {
    PredicateSpec protected_group; // S
    PredicateSpec ground_truth;    // Y
    // Exactly one prediction source. External predictions cover the original
    // rows only, so run_audit with replicates requires the builtin predictor;
    // pre-generated synthetic sets with their own predictions go through
    // compare_audit.
    std::optional<PredictorConfig> builtin;
    std::optional<PredictionVector> external_predictions;

    FitOptions fit;
    std::size_t replicates = 100;
    std::optional<std::size_t> synthetic_rows; // default: original row count
    bool retrain_per_replicate = false;        // default: train once, apply everywhere
    unsigned threads = 1;                      // 0 = hardware concurrency
};

struct MeasureAggregate {
    std::optional<double> original;
    std::optional<double> synthetic_mean; // over defined replicate values
    std::size_t defined_replicates = 0;
    std::size_t undefined_replicates = 0;
    std::optional<double> difference; // |original - synthetic_mean|
};

struct AuditComparison {
    FairnessReport original;
    std::vector<FairnessReport> replicate_reports;
    std::array<MeasureAggregate, kMeasureCount> measures;
    std::optional<double> average_difference; // mean of defined differences
    // Mean difference per fairness category, indexed by FairnessCategory.
    std::array<std::optional<double>, 4> per_category_error;
    std::size_t replicates = 0;
    std::uint64_t master_seed = 0;
    bool testing_mode = false;
    std::optional<double> rho_total;
    PipelineArtifacts artifacts; // plan, allocation, fitted model
};

// The full experiment: fit once on the original data, evaluate the original,
// release the original, then sample and evaluate `replicates` synthetic
// databases on independent streams and aggregate. The database is taken by
// value and destroyed after the original evaluation completes.
AuditComparison run_audit(EncodedDatabase db, const AuditRequest& request);

// Audit against pre-generated synthetic databases. When the prediction
// source is external, synthetic_predictions must carry one vector per set.
AuditComparison compare_audit(EncodedDatabase db, const AuditRequest& request,
                              const std::vector<EncodedDatabase>& synthetic_sets,
                              const std::vector<PredictionVector>& synthetic_predictions);

// Recomputes per-category means from the comparison's stored differences.
std::array<std::optional<double>, 4> category_error_summary(const AuditComparison& cmp);

// Mean of the defined values; nullopt when none are defined. Values are
// summed in ascending order so permutations cannot change the result.
std::optional<double> mean_of_defined(const std::vector<std::optional<double>>& values);

std::string comparison_to_json(const AuditComparison& cmp);

// Plain-text table with the Measure / Original / Synthetic / Difference
// columns and a caption line with the average difference at 4 decimals.
std::string comparison_to_table(const AuditComparison& cmp);

} // namespace fairsyn
