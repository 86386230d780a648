// Command-line front end: reach tubes, convergence studies, path tracking,
// inclusion checks, bound sheets and constant audits.

#include "eulerdi/bounds.hpp"
#include "eulerdi/euler_engine.hpp"
#include "eulerdi/inclusion_model.hpp"
#include "eulerdi/io.hpp"
#include "eulerdi/tracking.hpp"
#include "eulerdi/verify.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace eulerdi;

namespace {

struct Common {
    std::string problem = "signs1d";
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--problem", c.problem, "Benchmark name or path to a JSON problem file");
    cmd->add_option("--out", c.out, "Output directory (default: print to stdout)");
    cmd->add_option("--format", c.format, "Output format for stdout")->check(CLI::IsMember({"json", "csv"}));
}

int steps_for(const ProblemSpec& p, double dt)
{
    const double ratio = p.T / dt;
    const long n = std::lround(ratio);
    if (!(dt > 0.0) || n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw Error("--dt must divide the horizon T");
    return static_cast<int>(n);
}

void emit(const Common& c, const std::string& filename, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::filesystem::create_directories(c.out);
    write_text_file(std::filesystem::path(c.out) / filename, text);
}

WeightSchedule make_schedule(const std::string& kind, const ProblemSpec& p, int member)
{
    const int M = p.family.size();
    if (kind == "pure")
        return WeightSchedule::pure_member(member, M);
    if (kind == "chatter")
        return WeightSchedule::chattering(0, M > 1 ? 1 : 0, M);
    if (kind == "blend")
        return WeightSchedule::smooth_blend(0, M > 1 ? 1 : 0, M, p.T);
    throw Error("unknown schedule '" + kind + "' (pure, chatter, blend)");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Set-valued Forward Euler for differential inclusions"};
    app.require_subcommand(1);

    // reach
    Common reach_opts;
    double reach_dt = 0.1;
    std::optional<double> reach_cell;
    auto* reach = app.add_subcommand("reach", "Evolve discrete reachable sets and export the tube");
    add_common(reach, reach_opts);
    reach->add_option("--dt", reach_dt, "Time step (must divide T)");
    reach->add_option("--prune-cell", reach_cell, "Grid snapping cell (default dt^2 K L / 4)");

    // converge
    Common conv_opts;
    std::vector<double> dt_list = {0.1, 0.05, 0.025, 0.0125, 0.00625};
    int conv_refine = 32;
    std::optional<double> conv_cell;
    auto* converge = app.add_subcommand("converge", "Convergence study of reachable sets against a refined reference");
    add_common(converge, conv_opts);
    converge->add_option("--dt-list", dt_list, "Decreasing step sizes")->delimiter(',');
    converge->add_option("--refine", conv_refine, "Reference refinement factor");
    converge->add_option("--prune-cell", conv_cell, "Fixed prune cell (default dt^2 K L / 4 per step size)");

    // track
    Common track_opts;
    std::string track_method = "nonconvex";
    double track_dt = 0.1;
    int track_refine = 64;
    int grid_res = 8;
    std::optional<int> lookahead;
    int beam = 1;
    std::string schedule = "chatter";
    int member = 0;
    auto* track = app.add_subcommand("track", "Construct a discrete path tracking a reference solution");
    add_common(track, track_opts);
    track->add_option("method", track_method, "relaxed | nonconvex | controls")
        ->check(CLI::IsMember({"relaxed", "nonconvex", "controls"}));
    track->add_option("--dt", track_dt, "Time step (must divide T)");
    track->add_option("--refine", track_refine, "Fine steps per coarse step for the reference");
    track->add_option("--grid-res", grid_res, "Simplex grid resolution for relaxed steps");
    track->add_option("--lookahead", lookahead, "Lookahead depth (default: dimension)");
    track->add_option("--beam", beam, "Beam width");
    track->add_option("--schedule", schedule, "Reference weights: pure | chatter | blend");
    track->add_option("--member", member, "Member index for the pure schedule");

    // verify-inclusions
    Common incl_opts;
    std::string incl_kind = "coco";
    double incl_dt = 0.05;
    int incl_grid = 8;
    std::size_t samples = 200;
    std::uint64_t seed = kDefaultSeed;
    auto* incl = app.add_subcommand("verify-inclusions", "Check the hull inclusions on sampled points");
    add_common(incl, incl_opts);
    incl->add_option("kind", incl_kind, "coco | psi-hull")->check(CLI::IsMember({"coco", "psi-hull"}));
    incl->add_option("--dt", incl_dt, "Time step");
    incl->add_option("--grid-res", incl_grid, "Simplex grid resolution (psi-hull)");
    incl->add_option("--samples", samples, "Number of random hull points");
    incl->add_option("--seed", seed, "Sampling seed");

    // bounds
    BoundInputs bin;
    auto* bounds = app.add_subcommand("bounds", "Print every error constant as JSON");
    bounds->add_option("--K", bin.K);
    bounds->add_option("--L", bin.L);
    bounds->add_option("--S", bin.S);
    bounds->add_option("--T", bin.T);
    bounds->add_option("--d", bin.d);
    bounds->add_option("--M", bin.M);
    bounds->add_option("--dt", bin.dt);

    // validate
    Common val_opts;
    std::size_t val_samples = 2000;
    auto* validate = app.add_subcommand("validate", "Audit the declared constants K, L, S of a problem");
    add_common(validate, val_opts);
    validate->add_option("--samples", val_samples, "Number of Halton samples");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*reach) {
            const ProblemSpec p = resolve_problem(reach_opts.problem);
            const StepMaps maps = StepMaps::over_horizon(p.family, p.T, steps_for(p, reach_dt));
            const ReachTube tube =
                evolve_reach(maps, p.x0, reach_cell.value_or(default_prune_cell(p.family.constants(), maps.dt())));
            std::ostringstream csv;
            write_tube_csv(csv, tube);
            if (reach_opts.out.empty()) {
                std::cout << (reach_opts.format == "csv" ? csv.str() : tube_metadata(tube).dump(2) + "\n");
            } else {
                emit(reach_opts, "tube.csv", csv.str());
                emit(reach_opts, "tube_meta.json", tube_metadata(tube).dump(2) + "\n");
            }
            return 0;
        }
        if (*converge) {
            const ProblemSpec p = resolve_problem(conv_opts.problem);
            Report report;
            report.studies.push_back(run_convergence_study(p, dt_list, conv_refine, conv_cell));
            if (!conv_opts.out.empty())
                return emit_report(report, conv_opts.out) ? 0 : 1;
            if (conv_opts.format == "csv")
                write_study_csv(std::cout, report.studies.front());
            else
                std::cout << to_json(report.studies.front()).dump(2) << "\n";
            return report.all_pass() ? 0 : 1;
        }
        if (*track) {
            const ProblemSpec p = resolve_problem(track_opts.problem);
            const int N = steps_for(p, track_dt);
            const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
            const ReferencePath ref = make_reference(p, N, make_schedule(schedule, p, member), track_refine);
            TrackResult result;
            if (track_method == "relaxed")
                result = track_relaxed(maps, ref, grid_res);
            else if (track_method == "nonconvex")
                result = track_nonconvex(maps, ref, {lookahead, beam, grid_res});
            else
                result = track_controls(maps, ref, grid_res);
            std::ostringstream csv;
            write_path_csv(csv, result.path, ref);
            nlohmann::json j = to_json(result.report);
            j["reference"] = ref.provenance;
            if (track_opts.out.empty()) {
                std::cout << (track_opts.format == "csv" ? csv.str() : j.dump(2) + "\n");
            } else {
                emit(track_opts, "path.csv", csv.str());
                emit(track_opts, "track_report.json", j.dump(2) + "\n");
            }
            return result.report.within_bound() ? 0 : 1;
        }
        if (*incl) {
            const ProblemSpec p = resolve_problem(incl_opts.problem);
            Report report;
            if (incl_kind == "coco")
                report.checks.push_back(check_coco_inclusion(p, incl_dt, samples, seed));
            else
                report.checks.push_back(check_psi_hull_inclusion(p, p.x0, incl_dt, incl_grid, samples, seed));
            if (!incl_opts.out.empty())
                return emit_report(report, incl_opts.out) ? 0 : 1;
            std::cout << to_json(report.checks.front()).dump(2) << "\n";
            return report.all_pass() ? 0 : 1;
        }
        if (*bounds) {
            std::cout << to_json(make_bound_sheet(bin)).dump(2) << "\n";
            return 0;
        }
        if (*validate) {
            const ProblemSpec p = resolve_problem(val_opts.problem);
            const ConstantsReport r = validate_constants(p.family, p.box, val_samples);
            nlohmann::json j = to_json(r);
            j["problem"] = p.family.label();
            j["declared"] = {{"K", p.family.constants().K}, {"L", p.family.constants().L}, {"S", p.family.constants().S}};
            emit(val_opts, "validate.json", j.dump(2) + "\n");
            return r.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
