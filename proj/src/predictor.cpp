#include "fairsyn/predictor.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace fairsyn {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Raw score w.x + b for one row; one-hot features make this a gather.
double score_row(const LogisticModel& model, const EncodedDatabase& db, std::size_t row,
                 const std::vector<std::size_t>& attr_of_block) {
    double z = model.bias;
    for (std::size_t b = 0; b < model.layout.size(); ++b)
        z += model.weights[model.layout[b].offset + db.code(row, attr_of_block[b])];
    return z;
}

std::vector<std::size_t> resolve_layout(const LogisticModel& model, const EncodedDatabase& db) {
    std::vector<std::size_t> attr_of_block;
    attr_of_block.reserve(model.layout.size());
    for (const auto& block : model.layout) {
        std::size_t a;
        try {
            a = db.attribute_index(block.attribute);
        } catch (const MissingColumn&) {
            throw SchemaMismatch("database lacks feature attribute " + block.attribute);
        }
        if (db.domains()[a].cardinality() != block.cardinality)
            throw SchemaMismatch("attribute " + block.attribute + " cardinality changed");
        attr_of_block.push_back(a);
    }
    return attr_of_block;
}

// Stable mean log-loss; clamps the log arguments away from zero.
double cell_loss(double p, bool label) {
    constexpr double eps = 1e-12;
    return label ? -std::log(std::max(p, eps)) : -std::log(std::max(1.0 - p, eps));
}

} // namespace

double logistic_loss(const LogisticModel& model, const EncodedDatabase& db,
                     const std::vector<std::uint8_t>& labels) {
    if (labels.size() != db.row_count()) throw LengthMismatch("label vector length mismatch");
    auto attr_of_block = resolve_layout(model, db);
    double loss = 0.0;
    for (std::size_t r = 0; r < db.row_count(); ++r)
        loss += cell_loss(sigmoid(score_row(model, db, r, attr_of_block)), labels[r] != 0);
    return loss / static_cast<double>(db.row_count());
}

void logistic_gradient(const LogisticModel& model, const EncodedDatabase& db,
                       const std::vector<std::uint8_t>& labels,
                       std::vector<double>& grad_w, double& grad_b) {
    if (labels.size() != db.row_count()) throw LengthMismatch("label vector length mismatch");
    auto attr_of_block = resolve_layout(model, db);
    grad_w.assign(model.weights.size(), 0.0);
    grad_b = 0.0;
    for (std::size_t r = 0; r < db.row_count(); ++r) {
        double err = sigmoid(score_row(model, db, r, attr_of_block)) - (labels[r] ? 1.0 : 0.0);
        for (std::size_t b = 0; b < model.layout.size(); ++b)
            grad_w[model.layout[b].offset + db.code(r, attr_of_block[b])] += err;
        grad_b += err;
    }
    double inv_n = 1.0 / static_cast<double>(db.row_count());
    for (double& g : grad_w) g *= inv_n;
    grad_b *= inv_n;
}

LogisticModel train(const EncodedDatabase& db, const PredicateSpec& target,
                    const PredictorConfig& config) {
    if (db.row_count() == 0) throw DegenerateTarget("cannot train on an empty database");
    CompiledPredicate y = compile_predicate(target, db.domains());

    std::vector<std::uint8_t> labels(db.row_count());
    std::size_t positives = 0;
    for (std::size_t r = 0; r < db.row_count(); ++r) {
        labels[r] = y(db, r) ? 1 : 0;
        positives += labels[r];
    }
    if (positives == 0 || positives == db.row_count())
        throw DegenerateTarget("target predicate yields a single class");

    LogisticModel model;
    model.threshold = config.threshold;
    std::size_t offset = 0;
    for (const auto& dom : db.domains()) {
        if (dom.name == target.attribute) continue;
        if (std::find(config.exclude.begin(), config.exclude.end(), dom.name) != config.exclude.end())
            continue;
        model.layout.push_back({dom.name, dom.cardinality(), offset});
        offset += dom.cardinality();
    }
    model.weights.assign(offset, 0.0);

    std::vector<double> grad_w;
    double grad_b = 0.0;
    for (int it = 0; it < config.iterations; ++it) {
        logistic_gradient(model, db, labels, grad_w, grad_b);
        for (std::size_t i = 0; i < model.weights.size(); ++i)
            model.weights[i] -= config.step * grad_w[i];
        model.bias -= config.step * grad_b;
    }
    return model;
}

std::vector<double> predict_proba(const LogisticModel& model, const EncodedDatabase& db) {
    auto attr_of_block = resolve_layout(model, db);
    std::vector<double> probs(db.row_count());
    for (std::size_t r = 0; r < db.row_count(); ++r)
        probs[r] = sigmoid(score_row(model, db, r, attr_of_block));
    return probs;
}

PredictionVector predict(const LogisticModel& model, const EncodedDatabase& db) {
    auto probs = predict_proba(model, db);
    PredictionVector out(probs.size());
    for (std::size_t r = 0; r < probs.size(); ++r)
        out[r] = probs[r] >= model.threshold ? 1 : 0;
    return out;
}

PredictionVector load_predictions(const std::filesystem::path& path, const EncodedDatabase& db) {
    auto rows = read_csv_rows(path);
    if (rows.empty()) throw ParseError(path.string() + ": missing header row");
    const auto& header = rows.front();
    auto it = std::find(header.begin(), header.end(), "prediction");
    if (it == header.end()) throw MissingColumn(path.string() + ": no column named prediction");
    std::size_t col = static_cast<std::size_t>(it - header.begin());

    PredictionVector out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (col >= rows[r].size())
            throw ParseError(path.string() + ": row " + std::to_string(r) + " has too few cells");
        const std::string& v = rows[r][col];
        if (v == "1" || v == "true") out.push_back(1);
        else if (v == "0" || v == "false") out.push_back(0);
        else throw ParseError(path.string() + ": row " + std::to_string(r) +
                              ": prediction must be 0/1/true/false, got \"" + v + "\"");
    }
    if (out.size() != db.row_count())
        throw LengthMismatch(path.string() + ": " + std::to_string(out.size()) +
                             " predictions for " + std::to_string(db.row_count()) + " rows");
    return out;
}

std::string predictor_to_json(const LogisticModel& model) {
    nlohmann::json j;
    auto layout = nlohmann::json::array();
    for (const auto& b : model.layout)
        layout.push_back({{"attribute", b.attribute}, {"cardinality", b.cardinality}, {"offset", b.offset}});
    j["layout"] = layout;
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["threshold"] = model.threshold;
    return j.dump(2);
}

LogisticModel predictor_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("predictor: ") + e.what());
    }
    LogisticModel model;
    try {
        for (const auto& b : j.at("layout"))
            model.layout.push_back({b.at("attribute").get<std::string>(),
                                    b.at("cardinality").get<std::size_t>(),
                                    b.at("offset").get<std::size_t>()});
        model.weights = j.at("weights").get<std::vector<double>>();
        model.bias = j.at("bias").get<double>();
        model.threshold = j.at("threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("predictor: ") + e.what());
    }
    std::size_t dim = 0;
    for (const auto& b : model.layout) dim += b.cardinality;
    if (dim != model.weights.size()) throw ShapeMismatch("predictor weights do not match the layout");
    return model;
}

} // namespace fairsyn
