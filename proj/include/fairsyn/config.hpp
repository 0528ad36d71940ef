#pragma once

#include "fairsyn/audit.hpp"
#include "fairsyn/fairness.hpp"
#include "fairsyn/predictor.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fairsyn {

// One JSON config drives the whole workflow; every field can be overridden
// on the command line. Exactly one budget specification (rho, or epsilon and
// delta) and exactly one prediction source must be present.
struct AuditConfig {
    std::filesystem::path schema_path;
    std::filesystem::path data_path;
    PredicateSpec protected_group; // S
    PredicateSpec ground_truth;    // Y

    bool builtin_predictor = true;
    PredictorConfig predictor_config;
    std::filesystem::path predictions_path; // external source

    std::optional<double> rho;
    std::optional<double> epsilon;
    std::optional<double> delta;

    std::size_t replicates = 100;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    bool testing_mode = false;
    std::optional<std::pair<std::string, std::string>> force_edge;
    std::optional<std::size_t> synthetic_rows;
    bool retrain_per_replicate = false;
    std::vector<PredicateSpec> row_filter; // conjunction, applied at load
    unsigned threads = 1;
    std::optional<double> noisy_selection_rho;

    // The rho budget, converting epsilon/delta when that form was given.
    double resolve_rho() const;

    // Throws ConfigError when required fields are missing or both/neither
    // of a pair is specified.
    void validate() const;

    FitOptions fit_options() const;
    AuditRequest audit_request() const;
};

AuditConfig parse_config(const std::string& json_text,
                         const std::filesystem::path& relative_to = {});
AuditConfig load_config(const std::filesystem::path& path);

PredicateSpec predicate_from_json_text(const std::string& json_text);

// Loads the schema + data named by the config and applies the row filter.
EncodedDatabase load_database(const AuditConfig& config);

} // namespace fairsyn
