#include "rubricforge/pipeline/commands.hpp"
#include "rubricforge/pipeline/config.hpp"
#include "rubricforge/util/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace rp = rubricforge::pipeline;
namespace fs = std::filesystem;

namespace {

const char* kind_name(rubricforge::ErrorKind k) {
    switch (k) {
    case rubricforge::ErrorKind::Config: return "config error";
    case rubricforge::ErrorKind::Data: return "data error";
    case rubricforge::ErrorKind::Backend: return "backend error";
    case rubricforge::ErrorKind::Degenerate: return "statistical degeneracy";
    }
    return "error";
}

std::string flag_name(const std::string& key) {
    std::string out = "--" + key;
    for (auto& c : out)
        if (c == '.' || c == '_') c = '-';
    return out;
}

void report(const rp::CommandResult& r) {
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& o : r.outputs) std::cout << o.string() << "\n";
    if (!r.manifest.empty()) std::cout << r.manifest.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rubric discovery, LLM scoring and validation statistics"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", rp::tool_version());

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "Override one setting: section.key=value (repeatable)");

    // One flag per configuration key, applied after the file and environment.
    rp::PipelineConfig probe;
    const auto keys = rp::config_keys(probe);
    std::vector<std::pair<std::string, std::string>> flag_values(keys.size());
    std::vector<CLI::Option*> flag_opts;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        flag_values[i].first = keys[i].name;
        auto* opt = app.add_option(flag_name(keys[i].name), flag_values[i].second,
                                   keys[i].help + " [" + keys[i].get() + "]");
        opt->group("Configuration");
        flag_opts.push_back(opt);
    }

    rp::DiscoverArgs discover;
    auto* c_discover = app.add_subcommand("discover", "Brainstorm candidate criteria with independent agents");
    c_discover->add_option("--corpus", discover.corpus, "Corpus JSONL")->required();
    c_discover->add_option("-o,--output", discover.output, "Discovery JSON");

    rp::ConsolidateArgs consolidate;
    auto* c_consolidate = app.add_subcommand("consolidate", "Cluster candidate criteria into a rubric");
    c_consolidate->add_option("--discovery", consolidate.discovery, "Discovery JSON")->required();
    c_consolidate->add_option("--corpus", consolidate.corpus, "Corpus JSONL (to score candidates)");
    c_consolidate->add_option("--scores", consolidate.scores, "Precomputed candidate score matrix");
    c_consolidate->add_option("-o,--output-dir", consolidate.output_dir, "Output directory");

    rp::ScoreArgs score;
    auto* c_score = app.add_subcommand("score", "Score a corpus against a rubric");
    c_score->add_option("--rubric", score.rubric, "Rubric JSON")->required();
    c_score->add_option("--corpus", score.corpus, "Corpus JSONL")->required();
    c_score->add_option("--tag", score.replicate_tag, "Replicate tag (default scoring.replicate_tag)");
    c_score->add_option("-o,--output", score.output, "Score matrix CSV");

    rp::EvaluateArgs evaluate;
    auto* c_evaluate = app.add_subcommand("evaluate", "Predict outcomes from scores with nested cross-validation");
    c_evaluate->add_option("--scores", evaluate.scores, "Score matrix CSV")->required();
    c_evaluate->add_option("--corpus", evaluate.corpus, "Corpus JSONL with outcomes")->required();
    c_evaluate->add_option("--external", evaluate.external, "External features CSV (instance_id, features...)");
    c_evaluate->add_option("--candidate-scores", evaluate.candidate_scores,
                           "Candidate score matrix for the per-agent table");
    c_evaluate->add_option("-o,--output-dir", evaluate.output_dir, "Output directory");

    rp::AgreementArgs agreement;
    auto* c_agreement = app.add_subcommand("agreement", "Human-Human, AI-AI and Human-AI weighted kappa");
    c_agreement->add_option("--run1", agreement.run1, "AI scores, first run")->required();
    c_agreement->add_option("--run2", agreement.run2, "AI scores, second run")->required();
    c_agreement->add_option("--human", agreement.human, "Human ratings CSV")->required();
    c_agreement->add_option("-o,--output", agreement.output, "Agreement CSV");

    rp::AssociateArgs associate;
    auto* c_associate = app.add_subcommand("associate", "Poisson mixed model rate ratios for one outcome");
    c_associate->add_option("--scores", associate.scores, "Score matrix CSV")->required();
    c_associate->add_option("--corpus", associate.corpus, "Corpus JSONL with outcomes")->required();
    c_associate->add_option("--outcome", associate.outcome, "Outcome key")->required();
    c_associate->add_option("-o,--output", associate.output, "Rate ratio CSV");

    rp::StabilityArgs stability;
    auto* c_stability = app.add_subcommand("stability", "Cross-seed drift and vocabulary coverage");
    c_stability->add_option("rubrics", stability.rubrics, "Rubric JSON files (two or more)")->required();
    c_stability->add_option("--discovery", stability.discovery, "Discovery JSON (default: from rubric manifest)");
    c_stability->add_option("-o,--output", stability.output, "Stability JSON");

    rp::SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted truth");
    c_synth->add_option("--spec", synth.spec, "Synthetic spec JSON")->required();
    c_synth->add_option("--seed", synth.seed, "Generator seed");
    c_synth->add_option("-o,--output-dir", synth.output_dir, "Output directory");

    rp::SummarizeArgs summarize;
    auto* c_summarize = app.add_subcommand("summarize", "Corpus descriptive statistics");
    c_summarize->add_option("--corpus", summarize.corpus, "Corpus JSONL")->required();
    c_summarize->add_option("-o,--output", summarize.output, "Output stem (.csv and .txt)");

    rp::CalibrationArgs calibration;
    auto* c_calibration = app.add_subcommand("calibration-sample", "Stratified sample for human calibration");
    c_calibration->add_option("--scores", calibration.scores, "Score matrix CSV")->required();
    c_calibration->add_option("--corpus", calibration.corpus, "Corpus JSONL (adds feedback text)");
    c_calibration->add_option("--seed", calibration.seed, "Sampling seed");
    c_calibration->add_option("-o,--output", calibration.output, "Sample CSV");

    rp::MergeAnchorsArgs merge;
    auto* c_merge = app.add_subcommand("merge-anchors", "Add calibration examples to rubric anchors");
    c_merge->add_option("--rubric", merge.rubric, "Rubric JSON")->required();
    c_merge->add_option("--additions", merge.additions, "CSV: dimension, level, text")->required();
    c_merge->add_option("-o,--output", merge.output, "Calibrated rubric JSON");

    auto* c_config = app.add_subcommand("config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(rubricforge::ErrorKind::Config);
    }

    try {
        rp::PipelineConfig config;
        if (!config_path.empty()) rp::apply_config_file(config, config_path);
        rp::apply_environment(config, [](const char* name) { return std::getenv(name); });
        for (std::size_t i = 0; i < flag_opts.size(); ++i)
            if (flag_opts[i]->count() > 0) rp::set_config_value(config, flag_values[i].first, flag_values[i].second);
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw rubricforge::ConfigError("--set expects key=value, got \"" + o + "\"");
            rp::set_config_value(config, o.substr(0, eq), o.substr(eq + 1));
        }
        config.validate();

        auto& log = std::cerr;
        if (*c_discover) report(rp::cmd_discover(config, discover, log));
        else if (*c_consolidate) report(rp::cmd_consolidate(config, consolidate, log));
        else if (*c_score) report(rp::cmd_score(config, score, log));
        else if (*c_evaluate) report(rp::cmd_evaluate(config, evaluate, log));
        else if (*c_agreement) report(rp::cmd_agreement(config, agreement, log));
        else if (*c_associate) report(rp::cmd_associate(config, associate, log));
        else if (*c_stability) report(rp::cmd_stability(config, stability, log));
        else if (*c_synth) report(rp::cmd_synth(config, synth, log));
        else if (*c_summarize) report(rp::cmd_summarize(config, summarize, log));
        else if (*c_calibration) report(rp::cmd_calibration_sample(config, calibration, log));
        else if (*c_merge) report(rp::cmd_merge_anchors(config, merge, log));
        else if (*c_config) std::cout << rp::format_config_ini(config);
        return 0;
    } catch (const rubricforge::Error& e) {
        std::cerr << "rubricforge: " << kind_name(e.kind()) << ": " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::invalid_argument& e) {
        std::cerr << "rubricforge: config error: " << e.what() << "\n";
        return static_cast<int>(rubricforge::ErrorKind::Config);
    } catch (const std::exception& e) {
        std::cerr << "rubricforge: internal error: " << e.what() << "\n";
        return 1;
    }
}
