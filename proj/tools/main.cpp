#include "fairsyn/audit.hpp"
#include "fairsyn/config.hpp"
#include "fairsyn/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

constexpr double kReportAlphas[] = {1.0, 1.5, 2.0, 4.0, 8.0, 16.0, 32.0};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const char* what) {
    if (path.empty()) throw UsageError(std::string(what) + " path not specified");
    if (!fs::exists(path)) throw UsageError(std::string(what) + " file not found: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fairsyn::ParseError("cannot open for writing: " + path.string());
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw fairsyn::ParseError("cannot open: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Command-line overrides shared by fit/audit/compare.
struct CommonOverrides {
    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::optional<double> rho;
    std::optional<double> epsilon;
    std::optional<double> delta;
    bool testing_mode = false;
    std::optional<unsigned> threads;
    bool retrain_per_replicate = false;
    std::optional<std::size_t> synthetic_rows;

    void attach(CLI::App* cmd, bool with_replicates = true) {
        cmd->add_option("-c,--config", config_path, "JSON config file")->required();
        cmd->add_option("-o,--out", output_dir, "output directory (default: config, then $FAIRSYN_OUTPUT_DIR)");
        cmd->add_option("--seed", seed, "master seed override");
        if (with_replicates) cmd->add_option("--replicates", replicates, "replicate count override");
        cmd->add_option("--rho", rho, "privacy budget rho override");
        cmd->add_option("--epsilon", epsilon, "privacy budget epsilon override");
        cmd->add_option("--delta", delta, "privacy budget delta override");
        cmd->add_flag("--testing-mode", testing_mode, "sigma = 0 everywhere (no privacy)");
        cmd->add_option("--threads", threads, "worker threads for replicates");
        cmd->add_flag("--retrain-per-replicate", retrain_per_replicate,
                      "retrain the builtin predictor on every synthetic replicate");
        cmd->add_option("--synthetic-rows", synthetic_rows, "rows per synthetic replicate");
    }

    fairsyn::AuditConfig load() const {
        require_file(config_path, "config");
        fairsyn::AuditConfig cfg = fairsyn::load_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (cfg.output_dir.empty()) {
            if (const char* env = std::getenv("FAIRSYN_OUTPUT_DIR")) cfg.output_dir = env;
            else cfg.output_dir = "fairsyn_out";
        }
        if (seed) cfg.seed = *seed;
        if (replicates) cfg.replicates = *replicates;
        if (rho) { cfg.rho = rho; cfg.epsilon.reset(); cfg.delta.reset(); }
        if (epsilon) { cfg.epsilon = epsilon; cfg.rho.reset(); }
        if (delta) { cfg.delta = delta; cfg.rho.reset(); }
        if (testing_mode) cfg.testing_mode = true;
        if (threads) cfg.threads = *threads;
        if (retrain_per_replicate) cfg.retrain_per_replicate = true;
        if (synthetic_rows) cfg.synthetic_rows = synthetic_rows;
        cfg.validate();
        require_file(cfg.schema_path, "schema");
        require_file(cfg.data_path, "data");
        if (!cfg.builtin_predictor) require_file(cfg.predictions_path, "predictions");
        return cfg;
    }
};

std::string accountant_json(const fairsyn::PipelineArtifacts& artifacts,
                            const std::vector<fairsyn::AttributeDomain>& domains) {
    if (artifacts.allocation)
        return fairsyn::accountant_to_json(*artifacts.allocation, domains, kReportAlphas,
                                           artifacts.accountant_notes);
    nlohmann::json j;
    j["notes"] = artifacts.accountant_notes;
    j["rho_total"] = "not applicable";
    j["testing_mode"] = true;
    return j.dump(2);
}

void write_fit_artifacts(const fairsyn::PipelineArtifacts& artifacts,
                         const std::vector<fairsyn::AttributeDomain>& domains,
                         const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_text(out_dir / "plan.json", fairsyn::plan_to_json(artifacts.plan, domains));
    write_text(out_dir / "accountant.json", accountant_json(artifacts, domains));
    write_text(out_dir / "model.json", fairsyn::model_to_json(artifacts.model));
}

int cmd_fit(const CommonOverrides& common, bool discard) {
    fairsyn::AuditConfig cfg = common.load();
    fairsyn::EncodedDatabase db = fairsyn::load_database(cfg);

    auto start = std::chrono::steady_clock::now();
    fairsyn::PipelineArtifacts artifacts = fairsyn::fit_pipeline(db, cfg.fit_options());
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_fit_artifacts(artifacts, db.domains(), cfg.output_dir);
    std::printf("fit: %zu rows, %zu attributes, %zu tree edges\n", db.row_count(),
                db.attribute_count(), artifacts.plan.tree_edges.size());
    std::printf("fit time: %.2f s\n", seconds);
    std::printf("artifacts: %s\n", cfg.output_dir.string().c_str());

    if (discard) {
        // Verify the persisted model is complete before the operator deletes
        // the real data; the tool never deletes data it does not own.
        fairsyn::TreeModel reread = fairsyn::model_from_json(read_text(cfg.output_dir / "model.json"));
        std::printf("model artifact verified (%zu attributes, %zu edges); "
                    "the original data file is no longer needed by generate/audit-on-model\n",
                    reread.domains.size(), reread.edges.size());
    }
    return 0;
}

int cmd_generate(const std::string& model_path, std::size_t rows, std::uint64_t seed,
                 const std::string& out_path, bool rows_given) {
    require_file(model_path, "model");
    if (out_path.empty()) throw UsageError("output CSV path not specified");
    fairsyn::TreeModel model = fairsyn::model_from_json(read_text(model_path));
    std::size_t n = rows_given ? rows : model.default_rows;
    if (n == 0) throw UsageError("row count must be >= 1");

    fairsyn::RandomStream rng(seed, "replicate/0");
    fairsyn::EncodedDatabase synth = fairsyn::sample(model, n, rng);
    fairsyn::write_csv(synth, out_path);
    std::printf("generated %zu rows -> %s\n", synth.row_count(), out_path.c_str());
    return 0;
}

void write_comparison_artifacts(const fairsyn::AuditComparison& cmp,
                                const std::vector<fairsyn::AttributeDomain>& domains,
                                const fs::path& out_dir, bool with_fit_artifacts) {
    fs::create_directories(out_dir);
    if (with_fit_artifacts) write_fit_artifacts(cmp.artifacts, domains, out_dir);
    write_text(out_dir / "original_report.json", fairsyn::report_to_json(cmp.original));
    write_text(out_dir / "comparison.json", fairsyn::comparison_to_json(cmp));
    write_text(out_dir / "comparison.txt", fairsyn::comparison_to_table(cmp));
}

int cmd_audit(const CommonOverrides& common) {
    fairsyn::AuditConfig cfg = common.load();
    if (!cfg.builtin_predictor)
        throw UsageError("audit cannot reapply an external predictions file to synthetic rows; "
                         "use the builtin predictor, or `compare` with per-set prediction files");
    fairsyn::EncodedDatabase db = fairsyn::load_database(cfg);
    auto domains = db.domains();

    auto start = std::chrono::steady_clock::now();
    fairsyn::AuditComparison cmp = fairsyn::run_audit(std::move(db), cfg.audit_request());
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    write_comparison_artifacts(cmp, domains, cfg.output_dir, true);
    std::fputs(fairsyn::comparison_to_table(cmp).c_str(), stdout);
    std::printf("audit time: %.2f s (%zu replicates)\n", seconds, cmp.replicates);
    std::printf("artifacts: %s\n", cfg.output_dir.string().c_str());
    return 0;
}

int cmd_compare(const CommonOverrides& common, const std::vector<std::string>& synthetic_paths) {
    fairsyn::AuditConfig cfg = common.load();
    if (synthetic_paths.empty()) throw UsageError("compare needs at least one --synthetic CSV");

    fairsyn::EncodedDatabase db = fairsyn::load_database(cfg);
    auto domains = db.domains();
    auto schema = fairsyn::load_schema(cfg.schema_path);

    std::vector<fairsyn::EncodedDatabase> sets;
    std::vector<fairsyn::PredictionVector> preds;
    for (const auto& p : synthetic_paths) {
        require_file(p, "synthetic");
        sets.push_back(fairsyn::encode_csv(p, schema));
        if (!cfg.builtin_predictor) {
            fs::path pred_path = fs::path(p);
            pred_path.replace_extension(".predictions.csv");
            require_file(pred_path, "synthetic predictions");
            preds.push_back(fairsyn::load_predictions(pred_path, sets.back()));
        }
    }

    fairsyn::AuditRequest req = cfg.audit_request();
    if (!cfg.builtin_predictor)
        req.external_predictions = fairsyn::load_predictions(cfg.predictions_path, db);

    fairsyn::AuditComparison cmp = fairsyn::compare_audit(std::move(db), req, sets, preds);
    write_comparison_artifacts(cmp, domains, cfg.output_dir, false);
    std::fputs(fairsyn::comparison_to_table(cmp).c_str(), stdout);
    std::printf("artifacts: %s\n", cfg.output_dir.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairsyn: differentially private synthetic data for AI fairness auditing"};
    app.require_subcommand(1);

    CommonOverrides fit_common;
    bool discard = false;
    CLI::App* fit_cmd = app.add_subcommand("fit", "select, measure, and fit the tree model");
    fit_common.attach(fit_cmd, false);
    fit_cmd->add_flag("--discard", discard, "verify the model artifact so the operator can discard the data");

    std::string model_path, gen_out;
    std::size_t gen_rows = 0;
    std::uint64_t gen_seed = 0;
    CLI::App* gen_cmd = app.add_subcommand("generate", "sample a synthetic CSV from a fitted model");
    gen_cmd->add_option("-m,--model", model_path, "model.json from fit")->required();
    CLI::Option* rows_opt = gen_cmd->add_option("-n,--rows", gen_rows, "rows to sample (default: model hint)");
    gen_cmd->add_option("--seed", gen_seed, "sampling seed");
    gen_cmd->add_option("-o,--out", gen_out, "output CSV path")->required();

    CommonOverrides audit_common;
    CLI::App* audit_cmd = app.add_subcommand("audit", "full audit: fit, replicate, evaluate, compare");
    audit_common.attach(audit_cmd);

    CommonOverrides compare_common;
    std::vector<std::string> synthetic_paths;
    CLI::App* compare_cmd = app.add_subcommand("compare", "audit against pre-generated synthetic CSVs");
    compare_common.attach(compare_cmd, false);
    compare_cmd->add_option("-s,--synthetic", synthetic_paths, "synthetic CSV file(s)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_common, discard);
        if (gen_cmd->parsed()) return cmd_generate(model_path, gen_rows, gen_seed, gen_out,
                                                   rows_opt->count() > 0);
        if (audit_cmd->parsed()) return cmd_audit(audit_common);
        if (compare_cmd->parsed()) return cmd_compare(compare_common, synthetic_paths);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const fairsyn::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const fairsyn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return 0;
}
