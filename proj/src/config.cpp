#include "fairsyn/config.hpp"
#include "fairsyn/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace fairsyn {

namespace {

PredicateSpec predicate_from_json(const nlohmann::json& j) {
    PredicateSpec spec;
    try {
        spec.attribute = j.at("attribute").get<std::string>();
        spec.op = predicate_op_from_string(j.value("op", "eq"));
        auto push_value = [&](const nlohmann::json& v) {
            if (v.is_string()) spec.values.push_back(v.get<std::string>());
            else if (v.is_number_integer()) spec.values.push_back(std::to_string(v.get<long long>()));
            else throw ConfigError("predicate values must be strings or integers");
        };
        if (j.contains("value")) push_value(j.at("value"));
        if (j.contains("values"))
            for (const auto& v : j.at("values")) push_value(v);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("predicate: ") + e.what());
    }
    if (spec.values.empty()) throw ConfigError("predicate needs a value");
    return spec;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path;
    return base / path;
}

} // namespace

PredicateSpec predicate_from_json_text(const std::string& json_text) {
    try {
        return predicate_from_json(nlohmann::json::parse(json_text));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("predicate: ") + e.what());
    }
}

AuditConfig parse_config(const std::string& json_text, const std::filesystem::path& relative_to) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    AuditConfig cfg;
    try {
        cfg.schema_path = resolve(relative_to, j.at("schema").get<std::string>());
        cfg.data_path = resolve(relative_to, j.at("data").get<std::string>());
        cfg.protected_group = predicate_from_json(j.at("protected"));
        cfg.ground_truth = predicate_from_json(j.at("ground_truth"));

        if (j.contains("predictor")) {
            const auto& p = j.at("predictor");
            std::string type = p.value("type", "builtin");
            if (type == "builtin") {
                cfg.builtin_predictor = true;
                cfg.predictor_config.step = p.value("step", 0.1);
                cfg.predictor_config.iterations = p.value("iterations", 500);
                cfg.predictor_config.threshold = p.value("threshold", 0.5);
                if (p.contains("exclude"))
                    cfg.predictor_config.exclude = p.at("exclude").get<std::vector<std::string>>();
            } else if (type == "external") {
                cfg.builtin_predictor = false;
                cfg.predictions_path = resolve(relative_to, p.at("predictions").get<std::string>());
            } else {
                throw ConfigError("predictor type must be builtin or external");
            }
        }

        if (j.contains("budget")) {
            const auto& b = j.at("budget");
            if (b.contains("rho")) cfg.rho = b.at("rho").get<double>();
            if (b.contains("epsilon")) cfg.epsilon = b.at("epsilon").get<double>();
            if (b.contains("delta")) cfg.delta = b.at("delta").get<double>();
        }

        cfg.replicates = j.value("replicates", std::size_t{100});
        cfg.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("output_dir"))
            cfg.output_dir = resolve(relative_to, j.at("output_dir").get<std::string>());
        cfg.testing_mode = j.value("testing_mode", false);
        if (j.contains("force_edge")) {
            const auto& fe = j.at("force_edge");
            cfg.force_edge = {fe.at(0).get<std::string>(), fe.at(1).get<std::string>()};
        }
        if (j.contains("synthetic_rows")) cfg.synthetic_rows = j.at("synthetic_rows").get<std::size_t>();
        cfg.retrain_per_replicate = j.value("retrain_per_replicate", false);
        if (j.contains("row_filter"))
            for (const auto& p : j.at("row_filter")) cfg.row_filter.push_back(predicate_from_json(p));
        cfg.threads = j.value("threads", 1u);
        if (j.contains("noisy_selection_rho"))
            cfg.noisy_selection_rho = j.at("noisy_selection_rho").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

AuditConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

double AuditConfig::resolve_rho() const {
    if (rho) return *rho;
    if (epsilon && delta) return epsilon_delta_to_rho(*epsilon, *delta);
    throw ConfigError("budget requires rho, or epsilon and delta");
}

void AuditConfig::validate() const {
    if (schema_path.empty()) throw ConfigError("config needs a schema path");
    if (data_path.empty()) throw ConfigError("config needs a data path");
    if (!testing_mode) {
        bool has_rho = rho.has_value();
        bool has_eps = epsilon.has_value() || delta.has_value();
        if (has_rho && has_eps)
            throw ConfigError("specify the budget as rho or as epsilon/delta, not both");
        if (!has_rho && !(epsilon && delta))
            throw ConfigError("budget requires rho, or epsilon and delta");
        if (!(resolve_rho() > 0.0)) throw ConfigError("budget must be positive");
    }
    if (!builtin_predictor && predictions_path.empty())
        throw ConfigError("external predictor needs a predictions path");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
}

FitOptions AuditConfig::fit_options() const {
    FitOptions opts;
    opts.testing_mode = testing_mode;
    opts.rho_total = testing_mode ? 0.0 : resolve_rho();
    opts.master_seed = seed;
    opts.force_edge = force_edge;
    opts.noisy_selection_rho = noisy_selection_rho;
    return opts;
}

AuditRequest AuditConfig::audit_request() const {
    AuditRequest req;
    req.protected_group = protected_group;
    req.ground_truth = ground_truth;
    if (builtin_predictor) req.builtin = predictor_config;
    req.fit = fit_options();
    req.replicates = replicates;
    req.synthetic_rows = synthetic_rows;
    req.retrain_per_replicate = retrain_per_replicate;
    req.threads = threads;
    return req;
}

EncodedDatabase load_database(const AuditConfig& config) {
    auto domains = load_schema(config.schema_path);
    EncodedDatabase db = encode_csv(config.data_path, domains);
    if (config.row_filter.empty()) return db;

    std::vector<CompiledPredicate> filters;
    filters.reserve(config.row_filter.size());
    for (const auto& spec : config.row_filter)
        filters.push_back(compile_predicate(spec, db.domains()));

    DatabaseBuilder builder(db.domains());
    std::vector<std::uint32_t> row(db.attribute_count());
    for (std::size_t r = 0; r < db.row_count(); ++r) {
        bool keep = true;
        for (const auto& f : filters)
            if (!f(db, r)) { keep = false; break; }
        if (!keep) continue;
        for (std::size_t a = 0; a < db.attribute_count(); ++a) row[a] = db.code(r, a);
        builder.add_row(row);
    }
    return std::move(builder).build();
}

} // namespace fairsyn
