#pragma once

#include "fairsyn/dataset.hpp"
#include "fairsyn/fairness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fairsyn {

// Built-in baseline classifier so the pipeline runs end to end without an
// external model: logistic regression over one-hot encoded attribute codes,
// trained by full-batch gradient descent. Externally produced predictions
// plug in through load_predictions instead.

struct PredictorConfig {
    double step = 0.1;
    int iterations = 500;
    double threshold = 0.5;
    std::vector<std::string> exclude; // attributes withheld from the features
};

struct FeatureBlock {
    std::string attribute;
    std::size_t cardinality = 0;
    std::size_t offset = 0;
};

struct LogisticModel {
    std::vector<FeatureBlock> layout;
    std::vector<double> weights; // one per one-hot column
    double bias = 0.0;
    double threshold = 0.5;
};

// Mean logistic loss and its gradient at the given weights; exposed so the
// finite-difference check can drive the same code path.
double logistic_loss(const LogisticModel& model, const EncodedDatabase& db,
                     const std::vector<std::uint8_t>& labels);
void logistic_gradient(const LogisticModel& model, const EncodedDatabase& db,
                       const std::vector<std::uint8_t>& labels,
                       std::vector<double>& grad_w, double& grad_b);

// Deterministic training: zero-initialized weights, fixed step schedule.
// The target attribute is always excluded from the features. Throws
// DegenerateTarget when the target predicate yields a single class.
LogisticModel train(const EncodedDatabase& db, const PredicateSpec& target,
                    const PredictorConfig& config = {});

// sigmoid(w.x + b) >= threshold, per row. Throws SchemaMismatch when the
// database does not carry the trained feature layout.
PredictionVector predict(const LogisticModel& model, const EncodedDatabase& db);

// Per-row probabilities (before thresholding).
std::vector<double> predict_proba(const LogisticModel& model, const EncodedDatabase& db);

// CSV with a "prediction" column of 0/1/true/false, one row per database row.
PredictionVector load_predictions(const std::filesystem::path& path, const EncodedDatabase& db);

std::string predictor_to_json(const LogisticModel& model);
LogisticModel predictor_from_json(const std::string& text);

} // namespace fairsyn
