#pragma once

#include "fairsyn/dataset.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairsyn {

enum class PredicateOp { eq, neq, in_set, lt, ge };

// Declarative row predicate: compares one attribute's encoded value against
// level labels (categorical) or bin indices (numeric). Houses the protected
// group S and the ground truth Y; predictions come in as a vector.
struct PredicateSpec {
    std::string attribute;
    PredicateOp op = PredicateOp::eq;
    std::vector<std::string> values; // labels, or decimal bin indices for numeric
};

// Predicate resolved against a schema: a per-code acceptance mask.
struct CompiledPredicate {
    std::size_t attr_index = 0;
    std::vector<std::uint8_t> accept; // indexed by code

    bool operator()(const EncodedDatabase& db, std::size_t row) const {
        return accept[db.code(row, attr_index)] != 0;
    }
};

CompiledPredicate compile_predicate(const PredicateSpec& spec,
                                    const std::vector<AttributeDomain>& domains);

// One boolean per row, aligned with the database order.
using PredictionVector = std::vector<std::uint8_t>;

enum class FairnessMeasure : std::size_t {
    demographic_parity = 0,
    equalized_odds_fp,
    equalized_odds_tp,
    cond_use_accuracy_tp,
    cond_use_accuracy_tn,
    overall_accuracy,
};
inline constexpr std::size_t kMeasureCount = 6;

enum class FairnessCategory { independence, separation, sufficiency, none };

std::string_view measure_name(FairnessMeasure m);
FairnessCategory category_of(FairnessMeasure m);
std::string_view category_name(FairnessCategory c);

// The six absolute-difference measures plus the (S, Y, Yhat) contingency
// table. A measure whose conditioning event has no rows is UNDEFINED
// (nullopt), never 0 and never NaN.
struct FairnessReport {
    std::array<std::optional<double>, kMeasureCount> values;
    std::array<std::uint64_t, 8> contingency{}; // index = s*4 + y*2 + yhat
    std::size_t row_count = 0;

    std::optional<double> value(FairnessMeasure m) const {
        return values[static_cast<std::size_t>(m)];
    }
};

FairnessReport evaluate(const EncodedDatabase& db, const PredicateSpec& s,
                        const PredicateSpec& y, const PredictionVector& y_hat);

// Same computation from already-compiled predicates (hot path for replicates).
FairnessReport evaluate(const EncodedDatabase& db, const CompiledPredicate& s,
                        const CompiledPredicate& y, const PredictionVector& y_hat);

// {measures:{name:{value|"undefined", category}}, contingency:[8]}.
std::string report_to_json(const FairnessReport& report);

PredicateOp predicate_op_from_string(std::string_view s);
std::string_view predicate_op_name(PredicateOp op);

} // namespace fairsyn
