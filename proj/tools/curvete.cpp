#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "curvete/errors.hpp"
#include "curvete/experiment.hpp"
#include "curvete/manifest.hpp"
#include "curvete/metrics.hpp"

namespace {

// exit codes: 0 success, 2 validation error, 3 dependency error, 4 numerical error
int run(int argc, char** argv) {
    CLI::App app{"Anti-curriculum granular self-supervised training pipeline"};
    app.require_subcommand(1);

    std::string manifest_path, out_override, which = "pretext", checkpoint_path, mode, report_dir;
    std::int64_t seed_override = -1;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--manifest", manifest_path, "experiment manifest file")->required();
        cmd->add_option("--seed", seed_override, "override the manifest seed");
        cmd->add_option("--out", out_override, "override the manifest output directory");
    };

    auto* pretrain = app.add_subcommand("pretrain-cae", "train the convolutional autoencoder");
    add_common(pretrain);
    auto* decompose = app.add_subcommand("decompose", "build a granularity ladder");
    add_common(decompose);
    decompose->add_option("--which", which, "pretext or downstream")->required();
    auto* pretext = app.add_subcommand("pretext", "anti-curriculum pretext training");
    add_common(pretext);
    auto* finetune = app.add_subcommand("finetune", "downstream fine-tuning from the pretext backbone");
    add_common(finetune);
    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
    add_common(evaluate);
    evaluate->add_option("--checkpoint", checkpoint_path, "model checkpoint (default: final_curvete)");
    auto* ablate = app.add_subcommand("ablate", "run one ablation arm");
    add_common(ablate);
    ablate->add_option("--mode", mode, "traditional_transfer | wo_cl_w_sd | clog_cd")->required();
    auto* report = app.add_subcommand("report", "summarize eval artifacts into report.md");
    report->add_option("--out", report_dir, "output directory holding eval artifacts")->required();

    CLI11_PARSE(app, argc, argv);

    const auto load = [&]() {
        curvete::ExperimentManifest m = curvete::load_manifest(manifest_path);
        if (seed_override >= 0) {
            m.seed = static_cast<std::uint64_t>(seed_override);
            m.validate_and_hash();
        }
        if (!out_override.empty()) m.output_dir = out_override;
        return m;
    };

    if (pretrain->parsed()) {
        curvete::cmd_pretrain_cae(load());
        std::cout << "pretrain-cae: done\n";
    } else if (decompose->parsed()) {
        curvete::cmd_decompose(load(), which);
        std::cout << "decompose " << which << ": done\n";
    } else if (pretext->parsed()) {
        curvete::cmd_pretext(load());
        std::cout << "pretext: done\n";
    } else if (finetune->parsed()) {
        curvete::cmd_finetune(load());
        std::cout << "finetune: done\n";
    } else if (evaluate->parsed()) {
        const auto rep = curvete::cmd_evaluate(load(), checkpoint_path);
        std::printf("ACC %.2f%%  PR %.2f%%  RE %.2f%%  F1 %.2f%% (macro)\n", rep.accuracy * 100,
                    rep.macro_precision * 100, rep.macro_recall * 100, rep.macro_f1 * 100);
    } else if (ablate->parsed()) {
        const auto rep = curvete::cmd_ablate(load(), mode);
        std::printf("%s: ACC %.2f%%  PR %.2f%%  RE %.2f%%  F1 %.2f%% (macro)\n", mode.c_str(),
                    rep.accuracy * 100, rep.macro_precision * 100, rep.macro_recall * 100,
                    rep.macro_f1 * 100);
    } else if (report->parsed()) {
        std::cout << curvete::cmd_report(report_dir);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const curvete::DependencyError& e) {
        std::cerr << "dependency error: " << e.what() << "\n";
        return 3;
    } catch (const curvete::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const curvete::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
