// cardioprec: scan-rescan precision analysis of cardiac biomarkers.
//
// Global option --threads N precedes the subcommand.
//
//   cardioprec simulate --out DIR [--scenario cfg.json] [--seed N] [--subjects N] [--samples N]
//   cardioprec analyze  --manifest manifest.json --out DIR [--ci-method ...] [--format json|csv]
//   cardioprec dice     --manifest predictions.json --reference references.json [--out dice.csv]
//   cardioprec report   --input subjects.csv [--out ciou.json]
//
// Exit codes: 0 success, 1 internal error, 2 input validation error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cardioprec/cardioprec.hpp"

namespace fs = std::filesystem;
using namespace cardioprec;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        io::write_text_file(out_path, text);
    }
}

void print_summary(const PrecisionReport& r) {
    std::printf("%-5s %-4s %4s %16s %7s %7s %7s %7s %7s %7s %7s %7s\n", "", "", "n", "diff mean±std", "CoV", "A->B",
                "B->A", ">0%", ">25%", ">50%", ">75%", "PDP");
    for (const auto& e : r.entries) {
        const std::string diff = report::fixed2(e.diff_mean) + " ± " + report::fixed2(e.diff_std);
        std::printf("%-5s %-4s %4zu %16s %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f %7.2f\n",
                    std::string(to_string(e.biomarker)).c_str(), std::string(to_string(e.method)).c_str(),
                    e.n_subjects, diff.c_str(), e.cov_percent, e.cpp_a_to_b, e.cpp_b_to_a, e.ciou_above[0],
                    e.ciou_above[1], e.ciou_above[2], e.ciou_above[3], e.pdp);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scan-rescan precision of cardiac biomarkers from multi-sample segmentations"};
    app.require_subcommand(1);
    std::optional<std::size_t> threads_opt;
    app.add_option("--threads", threads_opt, "Worker threads (default: CARDIOPREC_THREADS or all cores)")
        ->check(CLI::PositiveNumber);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic scan-rescan dataset");
    std::string scenario_path, sim_out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> subjects, samples;
    sim_cmd->add_option("--scenario", scenario_path, "Scenario configuration JSON")->check(CLI::ExistingFile);
    sim_cmd->add_option("--out", sim_out, "Output directory (overrides the scenario's output_dir)");
    sim_cmd->add_option("--seed", seed, "Random seed");
    sim_cmd->add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--samples", samples, "Samples per scan for every method")->check(CLI::Range(2, 100000));

    // analyze
    auto* an_cmd = app.add_subcommand("analyze", "Compute precision metrics for a manifest");
    std::string manifest_path, an_out = ".", ci_method = "t-mean", cpp_mode = "mean", cov_mode = "pairwise",
                               format = "json", zero_method = "wilcox";
    double alpha = 0.05, ci_level = 0.95;
    bool strict = false;
    an_cmd->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
    an_cmd->add_option("--ci-method", ci_method, "Confidence interval construction")
        ->check(CLI::IsMember({"t-mean", "normal", "percentile"}));
    an_cmd->add_option("--ci-level", ci_level, "Confidence level")->check(CLI::Range(0.0, 1.0));
    an_cmd->add_option("--cpp-mode", cpp_mode, "CPP per-subject quantity")->check(CLI::IsMember({"mean", "samples"}));
    an_cmd->add_option("--cov-mode", cov_mode, "CoV aggregation")->check(CLI::IsMember({"pairwise", "rms"}));
    an_cmd->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    an_cmd->add_option("--wilcoxon-zero", zero_method, "Zero-difference handling")
        ->check(CLI::IsMember({"wilcox", "pratt"}));
    an_cmd->add_option("--format", format, "Dataset report format")->check(CLI::IsMember({"json", "csv"}));
    an_cmd->add_option("--out", an_out, "Output directory");
    an_cmd->add_flag("--strict", strict, "Check that every referenced file exists before analysis");

    // dice
    auto* dice_cmd = app.add_subcommand("dice", "Dice overlap of prediction samples against references");
    std::string pred_path, ref_path, dice_out;
    dice_cmd->add_option("--manifest", pred_path, "Predictions manifest")->required();
    dice_cmd->add_option("--reference", ref_path, "Reference manifest")->required();
    dice_cmd->add_option("--out", dice_out, "Output CSV (default stdout)");

    // report
    auto* rep_cmd = app.add_subcommand("report", "CIoU threshold bar-chart data from a per-subject CSV");
    std::string rep_in, rep_out;
    rep_cmd->add_option("--input,input", rep_in, "Per-subject CSV written by analyze")->required();
    rep_cmd->add_option("--out", rep_out, "Output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const std::size_t threads = threads_opt ? *threads_opt : default_thread_count();
        if (*sim_cmd) {
            sim::ScenarioConfig cfg;
            if (!scenario_path.empty()) {
                std::ifstream in(scenario_path);
                nlohmann::json doc;
                try {
                    doc = nlohmann::json::parse(in);
                } catch (const nlohmann::json::exception& e) {
                    throw Error(ErrorCode::InvalidArgument, scenario_path + ": " + e.what());
                }
                cfg = sim::scenario_from_json(doc);
            }
            if (!sim_out.empty()) cfg.output_dir = sim_out;
            if (seed) cfg.seed = *seed;
            if (subjects) cfg.n_subjects = *subjects;
            if (samples) cfg.set_samples(*samples);
            cfg.threads = threads;
            const auto result = sim::generate_scenario(cfg);
            std::cout << result.manifest_path.string() << '\n';
        } else if (*an_cmd) {
            AnalyzeOptions opt;
            opt.threads = threads;
            opt.precision.ci_method = *stats::parse_ci_method(ci_method);
            opt.precision.ci_level = ci_level;
            opt.precision.alpha = alpha;
            opt.precision.zero_method = zero_method == "pratt" ? stats::ZeroMethod::Pratt : stats::ZeroMethod::Wilcox;
            opt.aggregation.cpp_mode = *parse_cpp_mode(cpp_mode);
            opt.aggregation.cov_mode = *parse_cov_mode(cov_mode);
            if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "--alpha must be in (0,1)");
            if (!(ci_level > 0.0 && ci_level < 1.0)) throw Error(ErrorCode::InvalidArgument, "--ci-level must be in (0,1)");

            const auto manifest = io::load_manifest(manifest_path, {.strict = strict});
            const auto result = analyze(manifest, opt);
            fs::create_directories(an_out);
            const fs::path out_dir = an_out;
            io::write_text_file(out_dir / "subjects.csv", report::subjects_to_csv(result.subjects));
            io::write_samples_csv(result.samples, out_dir / "samples.csv");
            if (format == "json")
                io::write_text_file(out_dir / "report.json", report::report_to_json(result.report).dump(2) + "\n");
            else
                io::write_text_file(out_dir / "report.csv", report::report_to_csv(result.report));
            print_summary(result.report);
        } else if (*dice_cmd) {
            const auto preds = io::load_manifest(pred_path);
            const auto refs = io::load_manifest(ref_path, {.strict = false, .min_samples = 1});
            emit(dice_to_csv(compute_dice(preds, refs, threads)), dice_out);
        } else if (*rep_cmd) {
            const auto rows = report::read_subjects_csv(rep_in);
            emit(report::ciou_plot_data(rows).dump(2) + "\n", rep_out);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.is_validation() ? kExitValidation : kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
