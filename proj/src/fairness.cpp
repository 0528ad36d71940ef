#include "fairsyn/fairness.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace fairsyn {

namespace {

std::size_t value_to_code(const AttributeDomain& d, const std::string& raw) {
    if (d.kind == DomainKind::categorical) {
        for (std::size_t i = 0; i < d.levels.size(); ++i)
            if (d.levels[i] == raw) return i;
        if (d.allow_missing && raw == "__NA__") return d.cardinality() - 1;
        throw BadPredicate("attribute " + d.name + ": no level named \"" + raw + "\"");
    }
    // Numeric attributes are addressed by bin index, or by the bin label.
    std::size_t idx = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), idx);
    if (ec == std::errc() && ptr == raw.data() + raw.size()) {
        if (idx >= d.cardinality())
            throw BadPredicate("attribute " + d.name + ": bin index " + raw + " out of range");
        return idx;
    }
    for (std::size_t i = 0; i < d.cardinality(); ++i)
        if (d.level_label(i) == raw) return i;
    throw BadPredicate("attribute " + d.name + ": cannot interpret \"" + raw + "\" as a bin");
}

} // namespace

CompiledPredicate compile_predicate(const PredicateSpec& spec,
                                    const std::vector<AttributeDomain>& domains) {
    CompiledPredicate out;
    bool found = false;
    for (std::size_t a = 0; a < domains.size(); ++a) {
        if (domains[a].name == spec.attribute) {
            out.attr_index = a;
            found = true;
            break;
        }
    }
    if (!found) throw BadPredicate("predicate references unknown attribute " + spec.attribute);
    const AttributeDomain& d = domains[out.attr_index];
    if (spec.values.empty()) throw BadPredicate("predicate on " + spec.attribute + " has no values");
    if (spec.values.size() > 1 && spec.op != PredicateOp::in_set)
        throw BadPredicate("predicate op takes a single value");

    out.accept.assign(d.cardinality(), 0);
    switch (spec.op) {
    case PredicateOp::eq:
        out.accept[value_to_code(d, spec.values[0])] = 1;
        break;
    case PredicateOp::neq: {
        std::fill(out.accept.begin(), out.accept.end(), std::uint8_t{1});
        out.accept[value_to_code(d, spec.values[0])] = 0;
        break;
    }
    case PredicateOp::in_set:
        for (const auto& v : spec.values) out.accept[value_to_code(d, v)] = 1;
        break;
    case PredicateOp::lt: {
        std::size_t c = value_to_code(d, spec.values[0]);
        for (std::size_t i = 0; i < c; ++i) out.accept[i] = 1;
        break;
    }
    case PredicateOp::ge: {
        std::size_t c = value_to_code(d, spec.values[0]);
        for (std::size_t i = c; i < out.accept.size(); ++i) out.accept[i] = 1;
        break;
    }
    }
    return out;
}

std::string_view measure_name(FairnessMeasure m) {
    switch (m) {
    case FairnessMeasure::demographic_parity: return "Demographic Parity";
    case FairnessMeasure::equalized_odds_fp: return "Equalized Odds (False Positive)";
    case FairnessMeasure::equalized_odds_tp: return "Equalized Odds (True Positive)";
    case FairnessMeasure::cond_use_accuracy_tp: return "Conditional Use Accuracy Equality (True Positive)";
    case FairnessMeasure::cond_use_accuracy_tn: return "Conditional Use Accuracy Equality (True Negative)";
    case FairnessMeasure::overall_accuracy: return "Overall Accuracy Equality";
    }
    return "?";
}

FairnessCategory category_of(FairnessMeasure m) {
    switch (m) {
    case FairnessMeasure::demographic_parity: return FairnessCategory::independence;
    case FairnessMeasure::equalized_odds_fp:
    case FairnessMeasure::equalized_odds_tp: return FairnessCategory::separation;
    case FairnessMeasure::cond_use_accuracy_tp:
    case FairnessMeasure::cond_use_accuracy_tn: return FairnessCategory::sufficiency;
    case FairnessMeasure::overall_accuracy: return FairnessCategory::none;
    }
    return FairnessCategory::none;
}

std::string_view category_name(FairnessCategory c) {
    switch (c) {
    case FairnessCategory::independence: return "independence";
    case FairnessCategory::separation: return "separation";
    case FairnessCategory::sufficiency: return "sufficiency";
    case FairnessCategory::none: return "n/a";
    }
    return "?";
}

FairnessReport evaluate(const EncodedDatabase& db, const PredicateSpec& s,
                        const PredicateSpec& y, const PredictionVector& y_hat) {
    return evaluate(db, compile_predicate(s, db.domains()), compile_predicate(y, db.domains()), y_hat);
}

FairnessReport evaluate(const EncodedDatabase& db, const CompiledPredicate& s,
                        const CompiledPredicate& y, const PredictionVector& y_hat) {
    if (y_hat.size() != db.row_count())
        throw LengthMismatch("prediction vector has " + std::to_string(y_hat.size()) +
                             " entries for " + std::to_string(db.row_count()) + " rows");

    FairnessReport rep;
    rep.row_count = db.row_count();
    for (std::size_t r = 0; r < db.row_count(); ++r) {
        std::size_t si = s(db, r) ? 1 : 0;
        std::size_t yi = y(db, r) ? 1 : 0;
        std::size_t pi = y_hat[r] ? 1 : 0;
        ++rep.contingency[si * 4 + yi * 2 + pi];
    }

    // n[s][y][yhat]
    auto n = [&](std::size_t si, std::size_t yi, std::size_t pi) {
        return static_cast<double>(rep.contingency[si * 4 + yi * 2 + pi]);
    };
    // |p(group 1) - p(group 0)|, undefined when either denominator is empty.
    auto rate_gap = [](double num1, double den1, double num0, double den0) -> std::optional<double> {
        if (den1 == 0.0 || den0 == 0.0) return std::nullopt;
        return std::abs(num1 / den1 - num0 / den0);
    };

    auto set = [&](FairnessMeasure m, std::optional<double> v) {
        rep.values[static_cast<std::size_t>(m)] = v;
    };

    double group[2];
    for (std::size_t g = 0; g < 2; ++g)
        group[g] = n(g, 0, 0) + n(g, 0, 1) + n(g, 1, 0) + n(g, 1, 1);

    set(FairnessMeasure::demographic_parity,
        rate_gap(n(1, 0, 1) + n(1, 1, 1), group[1], n(0, 0, 1) + n(0, 1, 1), group[0]));
    set(FairnessMeasure::equalized_odds_fp,
        rate_gap(n(1, 0, 1), n(1, 0, 0) + n(1, 0, 1), n(0, 0, 1), n(0, 0, 0) + n(0, 0, 1)));
    set(FairnessMeasure::equalized_odds_tp,
        rate_gap(n(1, 1, 1), n(1, 1, 0) + n(1, 1, 1), n(0, 1, 1), n(0, 1, 0) + n(0, 1, 1)));
    set(FairnessMeasure::cond_use_accuracy_tp,
        rate_gap(n(1, 1, 1), n(1, 0, 1) + n(1, 1, 1), n(0, 1, 1), n(0, 0, 1) + n(0, 1, 1)));
    set(FairnessMeasure::cond_use_accuracy_tn,
        rate_gap(n(1, 0, 0), n(1, 0, 0) + n(1, 1, 0), n(0, 0, 0), n(0, 0, 0) + n(0, 1, 0)));
    set(FairnessMeasure::overall_accuracy,
        rate_gap(n(1, 0, 0) + n(1, 1, 1), group[1], n(0, 0, 0) + n(0, 1, 1), group[0]));
    return rep;
}

std::string report_to_json(const FairnessReport& report) {
    nlohmann::json j;
    nlohmann::json measures;
    for (std::size_t i = 0; i < kMeasureCount; ++i) {
        auto m = static_cast<FairnessMeasure>(i);
        nlohmann::json entry;
        if (report.values[i]) entry["value"] = *report.values[i];
        else entry["value"] = "undefined";
        entry["category"] = category_name(category_of(m));
        measures[std::string(measure_name(m))] = std::move(entry);
    }
    j["measures"] = std::move(measures);
    j["contingency"] = report.contingency;
    j["row_count"] = report.row_count;
    return j.dump(2);
}

PredicateOp predicate_op_from_string(std::string_view s) {
    if (s == "eq") return PredicateOp::eq;
    if (s == "neq") return PredicateOp::neq;
    if (s == "in_set") return PredicateOp::in_set;
    if (s == "lt") return PredicateOp::lt;
    if (s == "ge") return PredicateOp::ge;
    throw BadPredicate("unknown predicate op: " + std::string(s));
}

std::string_view predicate_op_name(PredicateOp op) {
    switch (op) {
    case PredicateOp::eq: return "eq";
    case PredicateOp::neq: return "neq";
    case PredicateOp::in_set: return "in_set";
    case PredicateOp::lt: return "lt";
    case PredicateOp::ge: return "ge";
    }
    return "?";
}

} // namespace fairsyn
