// Command-line front end: dataset validation, statistics, single-case
// judgment, evaluation runs, ATE analysis, the synthetic property battery,
// and fixture emission.
//
// Exit codes: 0 success, 1 semantic failure (validation failures, invalid
// setting, property violations), 2 io/config trouble, 3 external-service
// exhaustion.

#include "ac/analysis.hpp"
#include "ac/annotate.hpp"
#include "ac/assets.hpp"
#include "ac/battery.hpp"
#include "ac/dataset.hpp"
#include "ac/error.hpp"
#include "ac/evaluation.hpp"
#include "ac/judge.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using ac::Errc;
using ac::Error;
using Json = ac::Json;

constexpr int kExitOk = 0;
constexpr int kExitSemantic = 1;
constexpr int kExitIoConfig = 2;
constexpr int kExitRemote = 3;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case Errc::ServiceUnreachable:
        case Errc::ParseFailureAfterRetries:
            return kExitRemote;
        case Errc::InvalidSetting:
        case Errc::NoFocalEvent:
        case Errc::ValidationFailure:
            return kExitSemantic;
        default:
            return kExitIoConfig;
    }
}

struct CommonOptions {
    std::string format = "text";
    std::string config_path;
    std::uint64_t seed = 0;
    int parallel = 1;
    std::uint64_t budget = std::uint64_t(1) << 20;
    double jaccard = 0.5;
    std::string backend = "gold";
    std::string flip_list;
    std::string policy_temporal = "earliest";
    std::string policy_simultaneous = "score";
    std::string api_base;
    std::string api_key;
    std::string model = "default";
    int retries = 2;
    double timeout = 30.0;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--config", opt.config_path, "JSON config file mirroring the flags");
    cmd->add_option("--seed", opt.seed, "Seed for every randomized component");
    cmd->add_option("--parallel", opt.parallel, "Worker parallelism (1 = serial reference)");
    cmd->add_option("--budget", opt.budget, "Brute-force search budget (combinations)");
}

void add_backend_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--backend", opt.backend, "Annotation backend")
        ->check(CLI::IsMember({"gold", "noisy", "external"}));
    cmd->add_option("--flip-p", opt.flip_list,
                    "Noisy flip probabilities, e.g. sufficient=0.2,norm_violated=1");
    cmd->add_option("--jaccard", opt.jaccard, "Event-match token-set Jaccard threshold");
    cmd->add_option("--policy-temporal", opt.policy_temporal, "Temporal responsibility rule")
        ->check(CLI::IsMember({"earliest", "latest", "external"}));
    cmd->add_option("--policy-simultaneous", opt.policy_simultaneous,
                    "Simultaneous responsibility rule")
        ->check(CLI::IsMember({"score", "external"}));
    cmd->add_option("--api-base", opt.api_base, "External backend base address");
    cmd->add_option("--api-key", opt.api_key, "External backend API key");
    cmd->add_option("--model", opt.model, "External backend model identifier");
    cmd->add_option("--retries", opt.retries, "External backend retry budget");
    cmd->add_option("--timeout", opt.timeout, "External backend timeout, seconds");
}

// Precedence: explicit flags beat the config file; the config file beats the
// environment (environment only feeds the external endpoint and key).
void apply_config_file(const CLI::App* cmd, CommonOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path, std::ios::binary);
    if (!in) {
        ac::fail(Errc::IoFailure, "cannot open config '" + opt.config_path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    Json doc = Json::parse(buffer.str(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        ac::fail(Errc::MalformedDocument, "config file is not a JSON object");
    }
    auto unset = [&](const char* flag) {
        const CLI::Option* o = cmd->get_option_no_throw(flag);
        return o != nullptr && o->count() == 0;
    };
    auto load_str = [&](const char* key, const char* flag, std::string& into) {
        if (doc.contains(key) && unset(flag)) into = doc.at(key).get<std::string>();
    };
    load_str("format", "--format", opt.format);
    load_str("backend", "--backend", opt.backend);
    load_str("flip-p", "--flip-p", opt.flip_list);
    load_str("policy-temporal", "--policy-temporal", opt.policy_temporal);
    load_str("policy-simultaneous", "--policy-simultaneous", opt.policy_simultaneous);
    load_str("api-base", "--api-base", opt.api_base);
    load_str("api-key", "--api-key", opt.api_key);
    load_str("model", "--model", opt.model);
    if (doc.contains("seed") && unset("--seed")) opt.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("parallel") && unset("--parallel")) opt.parallel = doc.at("parallel").get<int>();
    if (doc.contains("budget") && unset("--budget")) opt.budget = doc.at("budget").get<std::uint64_t>();
    if (doc.contains("jaccard") && unset("--jaccard")) opt.jaccard = doc.at("jaccard").get<double>();
    if (doc.contains("retries") && unset("--retries")) opt.retries = doc.at("retries").get<int>();
    if (doc.contains("timeout") && unset("--timeout")) opt.timeout = doc.at("timeout").get<double>();
}

ac::FlipProbabilities parse_flips(const std::string& list) {
    ac::FlipProbabilities flips;
    if (list.empty()) return flips;
    std::istringstream in(list);
    std::string part;
    while (std::getline(in, part, ',')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) {
            ac::fail(Errc::InvalidArgument, "flip entry '" + part + "' lacks '='");
        }
        std::string key = part.substr(0, eq);
        double value = std::stod(part.substr(eq + 1));
        if (key == "sufficient" || key == "sc") flips.sufficient = value;
        else if (key == "necessary" || key == "nc") flips.necessary = value;
        else if (key == "halpern_pearl" || key == "ac") flips.halpern_pearl = value;
        else if (key == "norm_violated" || key == "n") flips.norm_violated = value;
        else if (key == "behavior_intended" || key == "i") flips.behavior_intended = value;
        else ac::fail(Errc::InvalidArgument, "unknown factor '" + key + "' in flip list");
    }
    return flips;
}

ac::AnnotatorConfig annotator_config(const CommonOptions& opt) {
    ac::AnnotatorConfig config;
    if (opt.backend == "gold") config.kind = ac::AnnotatorConfig::Kind::Gold;
    else if (opt.backend == "noisy") config.kind = ac::AnnotatorConfig::Kind::Noisy;
    else config.kind = ac::AnnotatorConfig::Kind::External;
    config.flips = parse_flips(opt.flip_list);
    config.seed = opt.seed;
    config.base_url = opt.api_base;
    config.api_key = opt.api_key;
    config.model = opt.model;
    config.max_retries = opt.retries;
    config.timeout_seconds = opt.timeout;
    ac::apply_env(config);
    if (config.kind == ac::AnnotatorConfig::Kind::External) config.validate();
    return config;
}

struct PolicyBundle {
    ac::ResolverPolicy policy;
    std::shared_ptr<const ac::ChatTransport> transport;
    std::unique_ptr<ac::BackendResolver> resolver;
};

PolicyBundle resolver_policy(const CommonOptions& opt) {
    PolicyBundle bundle;
    bundle.policy.temporal = opt.policy_temporal == "latest"
                                 ? ac::TemporalRule::LatestMoreResponsible
                                 : (opt.policy_temporal == "external"
                                        ? ac::TemporalRule::External
                                        : ac::TemporalRule::EarliestMoreResponsible);
    bundle.policy.simultaneous = opt.policy_simultaneous == "external"
                                     ? ac::SimultaneousRule::External
                                     : ac::SimultaneousRule::NormIntentScore;
    if (bundle.policy.temporal == ac::TemporalRule::External ||
        bundle.policy.simultaneous == ac::SimultaneousRule::External) {
        ac::AnnotatorConfig config = annotator_config(opt);
        config.kind = ac::AnnotatorConfig::Kind::External;
        config.validate();
        bundle.transport = ac::make_http_transport(config);
        bundle.resolver = std::make_unique<ac::BackendResolver>(config, bundle.transport);
        bundle.policy.resolver = bundle.resolver.get();
    }
    return bundle;
}

void emit(const CommonOptions& opt, const Json& doc, const std::string& text) {
    if (opt.format == "json") {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << text;
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_validate(const CommonOptions& opt, const std::string& dataset_path) {
    ac::LoadResult loaded = ac::load_dataset(dataset_path);
    PolicyBundle bundle = resolver_policy(opt);
    ac::ValidationReport report = ac::validate_dataset(loaded.dataset, bundle.policy);
    for (const auto& f : loaded.failures) {
        report.issues.push_back({f.index, "load-failure", f.message});
    }
    emit(opt, report.to_json(), report.to_text());
    return report.issues.empty() ? kExitOk : kExitSemantic;
}

int cmd_judge(const CommonOptions& opt, const std::string& case_path, bool with_trace) {
    std::ifstream in(case_path, std::ios::binary);
    if (!in) {
        ac::fail(Errc::IoFailure, "cannot open '" + case_path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    Json doc = Json::parse(buffer.str(), nullptr, false);
    if (doc.is_discarded()) {
        ac::fail(Errc::MalformedDocument, "case file is not valid JSON");
    }
    std::string story;
    Json reasoning;
    if (doc.contains("reasoning")) {
        reasoning = doc.at("reasoning");
        if (doc.contains("story")) story = doc.at("story").get<std::string>();
    } else if (doc.contains("causal_events")) {
        reasoning = doc;
    } else {
        ac::fail(Errc::MalformedDocument, "case file holds neither 'reasoning' nor a setting");
    }
    ac::CausalSetting setting = ac::CausalSetting::from_json(reasoning);
    PolicyBundle bundle = resolver_policy(opt);
    bundle.policy.story = story;
    ac::Judgment judgment = ac::judge_query(setting, bundle.policy);

    Json out;
    out["answer"] = ac::yesno_str(judgment.answer);
    out["explanation"] = judgment.explanation;
    if (with_trace) out["trace"] = judgment.trace_json();
    std::ostringstream text;
    text << ac::yesno_str(judgment.answer) << "\n" << judgment.explanation << "\n";
    if (with_trace) text << judgment.trace_json().dump(2) << "\n";
    emit(opt, out, text.str());
    return kExitOk;
}

int cmd_stats(const CommonOptions& opt, const std::string& dataset_path) {
    ac::LoadResult loaded = ac::load_dataset(dataset_path);
    for (const auto& f : loaded.failures) {
        std::cerr << "sample " << f.index << " skipped: " << f.message << "\n";
    }
    ac::DatasetStats stats = ac::dataset_stats(loaded.dataset);
    emit(opt, stats.to_json(), stats.to_text());
    return kExitOk;
}

int cmd_run(const CommonOptions& opt, const std::string& dataset_path, bool with_flip_analysis) {
    ac::LoadResult loaded = ac::load_dataset(dataset_path);
    for (const auto& f : loaded.failures) {
        std::cerr << "sample " << f.index << " skipped: " << f.message << "\n";
    }
    if (loaded.dataset.samples.empty()) {
        ac::fail(Errc::EmptyDataset, "no loadable samples in '" + dataset_path + "'");
    }
    PolicyBundle bundle = resolver_policy(opt);
    ac::RunConfig config;
    config.annotator = annotator_config(opt);
    config.policy = bundle.policy;
    config.matching.jaccard_threshold = opt.jaccard;
    config.parallelism = opt.parallel;
    std::vector<ac::RunRecord> records = ac::run_dataset(loaded.dataset, config);
    ac::MetricsSummary summary = ac::metrics(records);

    Json out = summary.to_json();
    std::ostringstream text;
    text << summary.to_text();
    std::size_t failures = 0;
    for (const auto& r : records) {
        if (r.failed) ++failures;
    }
    out["failed_records"] = failures;
    if (failures) text << "failed records: " << failures << "\n";
    if (with_flip_analysis) {
        auto deltas = ac::factor_flip_analysis(records, loaded.dataset, config);
        Json flips = Json::object();
        text << "factor correction deltas:\n";
        for (const auto& [factor, delta] : deltas) {
            flips[ac::factor_key(factor)] = delta;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "  %-18s %+.6f\n", ac::factor_key(factor), delta);
            text << buf;
        }
        out["factor_correction_delta"] = std::move(flips);
    }
    emit(opt, out, text.str());
    if (failures == records.size() && config.annotator.kind == ac::AnnotatorConfig::Kind::External) {
        return kExitRemote;
    }
    return kExitOk;
}

int cmd_analyze(const CommonOptions& opt, const std::string& dataset_path,
                const std::string& table_path, const std::string& synthetic, std::size_t rows,
                double effect, const std::string& estimator) {
    ac::AnalysisTable table;
    if (!table_path.empty()) {
        std::ifstream in(table_path, std::ios::binary);
        if (!in) ac::fail(Errc::IoFailure, "cannot open '" + table_path + "'");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        Json doc = Json::parse(buffer.str(), nullptr, false);
        if (doc.is_discarded()) ac::fail(Errc::MalformedDocument, "table file is not valid JSON");
        table = ac::AnalysisTable::from_json(doc);
    } else if (!synthetic.empty()) {
        table = ac::make_planted_table(rows, synthetic == "null" ? 0.0 : effect, opt.seed);
    } else if (!dataset_path.empty()) {
        ac::LoadResult loaded = ac::load_dataset(dataset_path);
        PolicyBundle bundle = resolver_policy(opt);
        ac::RunConfig config;
        config.annotator = annotator_config(opt);
        config.policy = bundle.policy;
        config.matching.jaccard_threshold = opt.jaccard;
        config.parallelism = opt.parallel;
        table = ac::table_from_records(ac::run_dataset(loaded.dataset, config));
    } else {
        ac::fail(Errc::InvalidArgument, "analyze needs --dataset, --table, or --synthetic");
    }

    const bool do_ols = estimator == "ols" || estimator == "both";
    const bool do_matching = estimator == "matching" || estimator == "both";
    Json out;
    out["rows"] = table.rows.size();
    Json factors = Json::object();
    std::ostringstream text;
    text << "factor              estimator  ATE        SE         p-value\n";
    for (ac::Factor f : ac::kAllFactors) {
        Json per = Json::object();
        auto line = [&](const char* name, const ac::AteEstimate& est) {
            Json one;
            one["ate"] = est.ate;
            one["se"] = est.se;
            one["p"] = est.p_value;
            one["rows_used"] = est.used_rows;
            if (est.dropped_strata) one["dropped_strata"] = est.dropped_strata;
            per[name] = std::move(one);
            char buf[128];
            std::snprintf(buf, sizeof(buf), "%-18s  %-9s  %+.6f  %.6f  %.6f\n",
                          ac::factor_key(f), name, est.ate, est.se, est.p_value);
            text << buf;
        };
        if (do_ols) line("ols", ac::ate_ols(table, f));
        if (do_matching) line("matching", ac::ate_matching(table, f));
        factors[ac::factor_key(f)] = std::move(per);
    }
    out["factors"] = std::move(factors);
    emit(opt, out, text.str());
    return kExitOk;
}

int cmd_oracle(const CommonOptions& opt, std::size_t models, int max_v, int max_u) {
    ac::BatteryConfig config;
    config.models = models;
    config.max_endogenous = max_v;
    config.max_exogenous = max_u;
    config.seed = opt.seed;
    config.parallelism = opt.parallel;
    config.budget.max_combinations = opt.budget;
    ac::BatteryReport report = ac::run_battery(config);
    emit(opt, report.to_json(), report.to_text());
    return report.ok() ? kExitOk : kExitSemantic;
}

int cmd_fixtures_emit(const CommonOptions&, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, contents] : ac::fixtures::files()) {
        std::filesystem::path path = std::filesystem::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            ac::fail(Errc::IoFailure, "cannot write '" + path.string() + "'");
        }
        out << contents;
        std::cout << path.string() << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Actual-causality engine: formal cause oracles, factor-based causal "
                 "judgment, and a benchmark evaluation harness"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string dataset_path, case_path, table_path, synthetic, estimator = "both", emit_dir = ".";
    bool with_trace = false, with_flip_analysis = false;
    std::size_t models = 1000, rows = 2000;
    double effect = 0.3;
    int max_v = 4, max_u = 3;

    CLI::App* validate = app.add_subcommand("validate", "Check a dataset's annotations");
    validate->add_option("--dataset", dataset_path, "Dataset JSON path")->required();
    add_common_flags(validate, opt);
    add_backend_flags(validate, opt);

    CLI::App* judge = app.add_subcommand("judge", "Judge a single case file");
    judge->add_option("--case", case_path, "Case JSON path")->required();
    judge->add_flag("--trace", with_trace, "Emit the structured trace");
    add_common_flags(judge, opt);
    add_backend_flags(judge, opt);

    CLI::App* stats = app.add_subcommand("stats", "Dataset statistics");
    stats->add_option("--dataset", dataset_path, "Dataset JSON path")->required();
    add_common_flags(stats, opt);

    CLI::App* run = app.add_subcommand("run", "Annotate, judge, and score a dataset");
    run->add_option("--dataset", dataset_path, "Dataset JSON path")->required();
    run->add_flag("--flip-analysis", with_flip_analysis, "Also report factor correction deltas");
    add_common_flags(run, opt);
    add_backend_flags(run, opt);

    CLI::App* analyze = app.add_subcommand("analyze", "ATE estimates per factor");
    analyze->add_option("--dataset", dataset_path, "Dataset JSON path");
    analyze->add_option("--table", table_path, "Pre-built analysis table JSON");
    analyze->add_option("--synthetic", synthetic, "Synthetic table: planted or null")
        ->check(CLI::IsMember({"planted", "null"}));
    analyze->add_option("--n", rows, "Synthetic table rows");
    analyze->add_option("--effect", effect, "Planted treatment effect");
    analyze->add_option("--estimator", estimator, "Estimator selection")
        ->check(CLI::IsMember({"ols", "matching", "both"}));
    add_common_flags(analyze, opt);
    add_backend_flags(analyze, opt);

    CLI::App* oracle = app.add_subcommand("oracle", "Random-model property battery");
    oracle->add_option("--models", models, "Number of random models");
    oracle->add_option("--max-v", max_v, "Max endogenous variables");
    oracle->add_option("--max-u", max_u, "Max exogenous variables");
    add_common_flags(oracle, opt);

    CLI::App* fixtures = app.add_subcommand("fixtures", "Bundled fixture data");
    CLI::App* fixtures_emit = fixtures->add_subcommand("emit", "Write bundled fixtures to disk");
    fixtures_emit->add_option("--dir", emit_dir, "Target directory");
    fixtures->require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config_file(active, opt);
        if (validate->parsed()) return cmd_validate(opt, dataset_path);
        if (judge->parsed()) return cmd_judge(opt, case_path, with_trace);
        if (stats->parsed()) return cmd_stats(opt, dataset_path);
        if (run->parsed()) return cmd_run(opt, dataset_path, with_flip_analysis);
        if (analyze->parsed())
            return cmd_analyze(opt, dataset_path, table_path, synthetic, rows, effect, estimator);
        if (oracle->parsed()) return cmd_oracle(opt, models, max_v, max_u);
        if (fixtures->parsed()) return cmd_fixtures_emit(opt, emit_dir);
        return kExitIoConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoConfig;
    }
}
