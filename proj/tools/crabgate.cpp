#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crabgate/crabgate.hpp"

namespace fs = std::filesystem;
using namespace crabgate;

namespace {

/// Flag combination that parses but makes no sense.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ModelFlags {
    int p = 20;
    double alpha = 120.0;
    double lambda = 0.0;
    double wall_weight = 0.7;
    std::uint64_t seed = 0;

    ModelParams params() const {
        ModelParams m;
        m.num_transitions = p;
        m.alpha_deg = alpha;
        m.noise_amplitude = lambda;
        m.wall_weight = wall_weight;
        m.seed = seed;
        return m;
    }
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
    cmd->add_option("--p", f.p, "potential transitions per agent and step (P)")->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", f.alpha, "sampling cone width in degrees")->check(CLI::Range(0.0, 360.0));
    cmd->add_option("--lambda", f.lambda, "external noise amplitude on velocity matching")
        ->check(CLI::Range(0.0, 1e9));
    cmd->add_option("--wall-weight", f.wall_weight, "blend toward the wall flow")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", f.seed, "master seed")->envname("CRABGATE_SEED");
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << bytes;
    if (!out.flush()) throw Error("failed writing " + path.string());
}

std::string telemetry_csv(const GateRunResult& r) {
    std::ostringstream out;
    out << "step,n_anticipation,n_following,n_wander,n_stayed,polarization,density\n";
    for (const auto& t : r.telemetry) {
        out << t.step << ',' << t.n_anticipation << ',' << t.n_following << ',' << t.n_wander << ',' << t.n_stayed
            << ',' << detail::format_real(t.polarization) << ',' << detail::format_real(t.density) << '\n';
    }
    return out.str();
}

std::string result_csv(const GateRunResult& r) {
    std::ostringstream out;
    out << "region,count\n";
    for (int k = 1; k <= 3; ++k) out << k << ',' << r.region(k) << '\n';
    out << "unresolved," << r.unresolved() << '\n';
    return out.str();
}

std::string bits_text(const OutputBits& b) {
    return std::string{b[0] ? '1' : '0', ' ', b[1] ? '1' : '0', ' ', b[2] ? '1' : '0'};
}

std::string fmt(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

DecisionRule make_rule(const std::string& decision, double fraction, double margin, const GateLayout& layout) {
    DecisionRule rule;
    rule.kind = decision == "difference" ? Decision::Difference : Decision::Fraction;
    rule.fraction = fraction;
    rule.margin = margin;
    if (rule.kind == Decision::Difference && gate_kind(layout) != GateKind::And) {
        throw UsageError("--decision difference applies to the and layout only");
    }
    return rule;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crabgate: soldier-crab swarm lattice and collision-based gates"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    ModelFlags run_model;
    std::string run_layout, run_inputs = "11", run_decision = "fraction", run_out, run_format = "ppm";
    int run_agents = 40, run_max_steps = 1000, run_snap_every = 0;
    double run_fraction = 0.8, run_margin = 0.1;
    bool run_arrows = false;
    auto* run = app.add_subcommand("run", "single gate run; summary to stdout, CSV and snapshots to --out");
    run->add_option("--layout", run_layout, "layout file")->required()->check(CLI::ExistingFile);
    run->add_option("--inputs", run_inputs, "input bits xy")->check(CLI::IsMember({"00", "01", "10", "11"}));
    run->add_option("--agents", run_agents, "agents per active input")->check(CLI::NonNegativeNumber);
    add_model_flags(run, run_model);
    run->add_option("--max-steps", run_max_steps, "step limit")->check(CLI::PositiveNumber);
    run->add_option("--decision", run_decision, "output rule")->check(CLI::IsMember({"fraction", "difference"}));
    run->add_option("--fraction", run_fraction, "fraction rule threshold")->check(CLI::Range(0.0, 1.0));
    run->add_option("--margin", run_margin, "difference rule margin")->check(CLI::Range(0.0, 1.0));
    run->add_option("--out", run_out, "output directory");
    run->add_option("--snap-every", run_snap_every, "snapshot period in steps, 0 = none")
        ->check(CLI::NonNegativeNumber);
    run->add_option("--format", run_format, "snapshot format")->check(CLI::IsMember({"ppm", "svg"}));
    run->add_flag("--flow-arrows", run_arrows, "draw wall flow in snapshots");

    // truth-table ----------------------------------------------------------
    ModelFlags tt_model;
    std::string tt_layout, tt_decision = "fraction";
    int tt_agents = 40, tt_trials = 100, tt_max_steps = 1000, tt_jobs = 1;
    double tt_fraction = 0.8, tt_margin = 0.1;
    auto* tt = app.add_subcommand("truth-table", "all four input pairs, repeated trials");
    tt->add_option("--layout", tt_layout, "layout file")->required()->check(CLI::ExistingFile);
    tt->add_option("--agents", tt_agents, "agents per active input")->check(CLI::NonNegativeNumber);
    add_model_flags(tt, tt_model);
    tt->add_option("--trials", tt_trials, "trials per input pair")->check(CLI::PositiveNumber);
    tt->add_option("--max-steps", tt_max_steps, "step limit")->check(CLI::PositiveNumber);
    tt->add_option("--decision", tt_decision, "output rule")->check(CLI::IsMember({"fraction", "difference"}));
    tt->add_option("--fraction", tt_fraction, "fraction rule threshold")->check(CLI::Range(0.0, 1.0));
    tt->add_option("--margin", tt_margin, "difference rule margin")->check(CLI::Range(0.0, 1.0));
    tt->add_option("--jobs", tt_jobs, "worker threads")->check(CLI::PositiveNumber);

    // sweep-noise ----------------------------------------------------------
    ModelFlags sn_model;
    SweepConfig sn;
    sn.p_values = {1, 20};
    std::string sn_inputs = "11", sn_out;
    auto* sweep_noise = app.add_subcommand("sweep-noise", "gate performance over P x lambda, CSV");
    sweep_noise->add_option("--layout", sn.layout_path, "layout file")->required()->check(CLI::ExistingFile);
    sweep_noise->add_option("--inputs", sn_inputs, "input bits xy")->check(CLI::IsMember({"00", "01", "10", "11"}));
    sweep_noise->add_option("--agents", sn.agents_per_input, "agents per active input")
        ->check(CLI::NonNegativeNumber);
    sweep_noise->add_option("--p-values", sn.p_values, "P grid")->delimiter(',')->check(CLI::PositiveNumber);
    sweep_noise->add_option("--lambda-values", sn.lambda_values, "lambda grid within [0, 0.2]")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 0.2));
    sweep_noise->add_option("--alpha", sn_model.alpha, "sampling cone width in degrees")->check(CLI::Range(0.0, 360.0));
    sweep_noise->add_option("--wall-weight", sn_model.wall_weight, "blend toward the wall flow")
        ->check(CLI::Range(0.0, 1.0));
    sweep_noise->add_option("--seed", sn.seed, "master seed")->envname("CRABGATE_SEED");
    sweep_noise->add_option("--trials", sn.trials, "trials per grid cell")->check(CLI::PositiveNumber);
    sweep_noise->add_option("--max-steps", sn.max_steps, "step limit")->check(CLI::PositiveNumber);
    sweep_noise->add_option("--fraction", sn.decision_fraction, "fraction rule threshold")
        ->check(CLI::Range(0.0, 1.0));
    sweep_noise->add_option("--jobs", sn.jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep_noise->add_option("--out", sn_out, "CSV file, stdout when omitted");

    // sweep-perturbation ---------------------------------------------------
    ModelFlags sp_model;
    SweepConfig sp;
    std::string sp_out;
    auto* sweep_pert = app.add_subcommand("sweep-perturbation", "polarization and density over P on a torus, CSV");
    sweep_pert->add_option("--p-values", sp.p_values, "P grid")->delimiter(',')->check(CLI::PositiveNumber);
    sweep_pert->add_option("--p-max", sp.p_max, "P normalizer")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--width", sp.arena_width, "arena width")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--height", sp.arena_height, "arena height")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--agents", sp.n_agents, "agents in the arena")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--warmup", sp.warmup_steps, "steps before measuring")->check(CLI::NonNegativeNumber);
    sweep_pert->add_option("--measure", sp.measure_steps, "steps averaged")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--alpha", sp_model.alpha, "sampling cone width in degrees")->check(CLI::Range(0.0, 360.0));
    sweep_pert->add_option("--seed", sp.seed, "master seed")->envname("CRABGATE_SEED");
    sweep_pert->add_option("--trials", sp.trials, "arena runs per P")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--jobs", sp.jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep_pert->add_option("--out", sp_out, "CSV file, stdout when omitted");

    // render ---------------------------------------------------------------
    ModelFlags rd_model;
    std::string rd_layout, rd_inputs = "11", rd_out, rd_format = "ppm";
    int rd_agents = 40, rd_frame = 0, rd_cell_px = 6;
    bool rd_arrows = false;
    auto* render = app.add_subcommand("render", "one frame of a gate run");
    render->add_option("--layout", rd_layout, "layout file")->required()->check(CLI::ExistingFile);
    render->add_option("--inputs", rd_inputs, "input bits xy")->check(CLI::IsMember({"00", "01", "10", "11"}));
    render->add_option("--agents", rd_agents, "agents per active input")->check(CLI::NonNegativeNumber);
    add_model_flags(render, rd_model);
    render->add_option("--frame", rd_frame, "step to draw")->check(CLI::NonNegativeNumber);
    render->add_option("--format", rd_format, "image format")->check(CLI::IsMember({"ppm", "svg"}));
    render->add_option("--cell-px", rd_cell_px, "pixels per cell")->check(CLI::Range(2, 64));
    render->add_option("--out", rd_out, "image file")->required();
    render->add_flag("--flow-arrows", rd_arrows, "draw wall flow");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app.help() : subs.front()->help());
        return 2;
    }

    try {
        if (run->parsed()) {
            if (run_snap_every > 0 && run_out.empty()) throw UsageError("--snap-every needs --out");
            const GateLayout layout = load_layout(run_layout);
            const DecisionRule rule = make_rule(run_decision, run_fraction, run_margin, layout);
            const ModelParams params = run_model.params();
            params.validate();
            const GateInputs inputs = parse_inputs(run_inputs);
            const ImageFormat format = parse_format(run_format);
            if (!run_out.empty()) fs::create_directories(run_out);

            TrailRecorder trails;
            RenderOptions ropt;
            ropt.flow_arrows = run_arrows;
            ropt.regions = &layout;
            GateObserver observer;
            if (run_snap_every > 0) {
                observer = [&](int t, const Swarm& s) {
                    trails.record(s.agents());
                    if (t % run_snap_every != 0) return;
                    write_file(fs::path(run_out) / snapshot_name(t, format),
                               render_frame(s.world(), s.agents(), trails, format, ropt));
                };
            }
            Rng rng(params.seed);
            const GateRunResult r = run_gate(layout, inputs, params, run_agents, run_max_steps, rng, observer);

            std::cout << "layout " << layout.name << "  inputs " << run_inputs << "  agents " << r.n_agents
                      << "  steps " << r.steps_used << '\n';
            for (int k = 1; k <= 3; ++k) std::cout << "output " << k << "  " << r.region(k) << '\n';
            std::cout << "unresolved " << r.unresolved() << '\n';
            if (r.n_agents > 0) {
                if (rule.kind == Decision::Difference) {
                    std::cout << "difference bit " << decide_by_difference(r, rule.margin) << '\n';
                } else {
                    std::cout << "bits " << bits_text(decide_by_fraction(r, rule.fraction)) << '\n';
                }
            }
            if (!run_out.empty()) {
                write_file(fs::path(run_out) / "result.csv", result_csv(r));
                write_file(fs::path(run_out) / "telemetry.csv", telemetry_csv(r));
            }
        } else if (tt->parsed()) {
            const GateLayout layout = load_layout(tt_layout);
            const DecisionRule rule = make_rule(tt_decision, tt_fraction, tt_margin, layout);
            const ModelParams params = tt_model.params();
            params.validate();
            const TruthTable table = truth_table(layout, params, tt_agents, tt_trials, tt_max_steps, rule, tt_jobs);
            std::cout << "layout " << table.layout << "  P " << params.num_transitions << "  lambda "
                      << params.noise_amplitude << "  trials " << tt_trials << '\n';
            std::cout << "x y | out1 out2 out3 | success | mean1  mean2  mean3  unres\n";
            for (const auto& row : table.rows) {
                std::cout << row.inputs.x << ' ' << row.inputs.y << " |  " << row.modal[0] << "    " << row.modal[1]
                          << "    " << row.modal[2] << "   | " << std::setw(3) << row.successes << '/'
                          << row.trials << " | " << fmt(row.mean_counts[1], 1) << "  " << fmt(row.mean_counts[2], 1)
                          << "  " << fmt(row.mean_counts[3], 1) << "  " << fmt(row.mean_counts[0], 1) << '\n';
            }
        } else if (sweep_noise->parsed()) {
            const GateLayout layout = load_layout(sn.layout_path);
            sn.inputs = parse_inputs(sn_inputs);
            const auto rows = sweep_external_noise(layout, sn, sn_model.params());
            if (sn_out.empty()) {
                write_csv(std::cout, rows);
            } else {
                write_csv(fs::path(sn_out), rows);
            }
        } else if (sweep_pert->parsed()) {
            const auto rows = sweep_inherent_perturbation(sp, sp_model.params());
            if (sp_out.empty()) {
                write_csv(std::cout, rows);
            } else {
                write_csv(fs::path(sp_out), rows);
            }
        } else if (render->parsed()) {
            const GateLayout layout = load_layout(rd_layout);
            const ModelParams params = rd_model.params();
            params.validate();
            const ImageFormat format = parse_format(rd_format);
            TrailRecorder trails;
            RenderOptions ropt;
            ropt.flow_arrows = rd_arrows;
            ropt.regions = &layout;
            ropt.cell_px = rd_cell_px;
            std::string image;
            auto capture = [&](int t, const Swarm& s) {
                trails.record(s.agents());
                if (t == rd_frame) image = render_frame(s.world(), s.agents(), trails, format, ropt);
            };
            Rng rng(params.seed);
            const GateRunResult r =
                run_gate(layout, parse_inputs(rd_inputs), params, rd_agents, std::max(rd_frame, 1), rng, capture);
            if (image.empty()) {
                throw Error("run ended at step " + std::to_string(r.steps_used) + " before frame " +
                            std::to_string(rd_frame));
            }
            write_file(rd_out, image);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        std::cerr << app.get_subcommands().front()->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
