#include "eulerdi/io.hpp"

#include "eulerdi/verify.hpp"

#include <fstream>

namespace eulerdi {

namespace {

nlohmann::json optional_number(const std::optional<double>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json to_json(const BoundSheet& sheet)
{
    const auto& in = sheet.inputs;
    nlohmann::json j;
    j["inputs"] = {{"K", in.K}, {"L", in.L}, {"S", in.S}, {"T", in.T}, {"d", in.d}, {"M", in.M}, {"dt", in.dt}};
    j["reach_sets"] = optional_number(sheet.reach_sets);
    j["convex_path"] = optional_number(sheet.convex_path);
    j["nonconvex_path"] = optional_number(sheet.nonconvex_path);
    j["controls_path_dt"] = optional_number(sheet.controls_path_dt);
    j["controls_path_dt2"] = optional_number(sheet.controls_path_dt2);
    j["coco_radius"] = optional_number(sheet.coco_radius);
    j["psi_hull_radius"] = optional_number(sheet.psi_hull_radius);
    // Entries with a K^2 term do not scale linearly in K.
    j["quadratic_in_K"] = {"reach_sets", "controls_path_dt2", "coco_radius", "psi_hull_radius"};
    if (!sheet.notes.empty())
        j["notes"] = sheet.notes;
    return j;
}

nlohmann::json to_json(const TrackReport& r)
{
    return {{"method", r.method},
            {"max_deviation", r.max_deviation},
            {"theoretical_bound", r.theoretical_bound},
            {"slack", r.slack},
            {"lookahead_depth", r.lookahead_depth},
            {"beam_width", r.beam_width},
            {"grid_res", r.grid_res},
            {"verdict", r.within_bound() ? "pass" : "fail"}};
}

nlohmann::json to_json(const ConstantsReport& r)
{
    return {{"point_samples", r.point_samples},
            {"pair_samples", r.pair_samples},
            {"max_velocity", r.max_velocity},
            {"max_jacobian", r.max_jacobian},
            {"max_taylor_ratio", r.max_taylor_ratio},
            {"max_hausdorff_ratio", r.max_hausdorff_ratio},
            {"violations", r.violations},
            {"verdict", r.ok() ? "pass" : "fail"}};
}

nlohmann::json to_json(const ConvergenceStudy& s)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"dt", r.dt},
                        {"steps", r.steps},
                        {"max_error", r.max_error},
                        {"final_error", r.final_error},
                        {"bound", r.bound},
                        {"slack", r.slack},
                        {"prune_cell", r.prune_cell},
                        {"coarse_points", r.coarse_points},
                        {"reference_points", r.reference_points},
                        {"within_bound", r.within_bound}});
    }
    return {{"label", s.label},
            {"refine", s.refine},
            {"rows", rows},
            {"fitted_order", optional_number(s.fitted_order)},
            {"verdict", s.all_within_bound() ? "pass" : "fail"}};
}

nlohmann::json to_json(const InclusionCheck& c)
{
    nlohmann::json j = {{"theorem", c.theorem},
                        {"label", c.label},
                        {"dt", c.dt},
                        {"members", c.members},
                        {"sample_count", c.sample_count},
                        {"radius", c.radius},
                        {"max_excess", c.max_excess},
                        {"tolerance", c.tolerance},
                        {"verdict", c.pass ? "pass" : "fail"}};
    if (c.two_sided_distance) {
        j["two_sided_distance"] = *c.two_sided_distance;
        j["two_sided_allowance"] = optional_number(c.two_sided_allowance);
    }
    return j;
}

void write_tube_csv(std::ostream& out, const ReachTube& tube)
{
    const Index d = tube.clouds.empty() ? 0 : tube.clouds.front().dim();
    out << "n,point_index";
    for (Index k = 1; k <= d; ++k)
        out << ",x_" << k;
    out << '\n';
    out.precision(17);
    for (std::size_t n = 0; n < tube.clouds.size(); ++n) {
        const auto& c = tube.clouds[n];
        for (Index j = 0; j < c.size(); ++j) {
            out << n << ',' << j;
            for (Index k = 0; k < d; ++k)
                out << ',' << c.point(j)(k);
            out << '\n';
        }
    }
}

nlohmann::json tube_metadata(const ReachTube& tube)
{
    nlohmann::json sizes = nlohmann::json::array();
    for (const auto& c : tube.clouds)
        sizes.push_back(c.size());
    return {{"dt", tube.dt},
            {"steps", static_cast<long>(tube.clouds.size()) - 1},
            {"prune_cell", tube.prune_cell},
            {"accumulated_prune_error", tube.accumulated_prune_error()},
            {"prune_error", tube.prune_error},
            {"refine", tube.refine},
            {"reference_budget", tube.reference_budget},
            {"cloud_sizes", sizes}};
}

void write_path_csv(std::ostream& out, const DiscretePath& path, const ReferencePath& ref)
{
    if (path.states.size() != ref.states.size())
        throw Error("write_path_csv: path and reference lengths differ");
    const Index d = path.states.front().size();
    out << "n,control";
    for (Index k = 1; k <= d; ++k)
        out << ",x_" << k;
    for (Index k = 1; k <= d; ++k)
        out << ",ref_x_" << k;
    out << ",deviation\n";
    out.precision(17);
    for (std::size_t n = 0; n < path.states.size(); ++n) {
        out << n << ',';
        if (n + 1 < path.states.size()) {
            if (path.relaxed()) {
                const Vector& w = path.relaxed_controls[n];
                for (Index k = 0; k < w.size(); ++k)
                    out << (k ? ";" : "") << w(k);
            } else {
                out << path.controls[n];
            }
        }
        for (Index k = 0; k < d; ++k)
            out << ',' << path.states[n](k);
        for (Index k = 0; k < d; ++k)
            out << ',' << ref.states[n](k);
        out << ',' << (path.states[n] - ref.states[n]).norm() << '\n';
    }
}

void write_study_csv(std::ostream& out, const ConvergenceStudy& study)
{
    out << "dt,steps,max_error,final_error,bound,slack,prune_cell,coarse_points,reference_points,within_bound\n";
    out.precision(17);
    for (const auto& r : study.rows) {
        out << r.dt << ',' << r.steps << ',' << r.max_error << ',' << r.final_error << ',' << r.bound << ','
            << r.slack << ',' << r.prune_cell << ',' << r.coarse_points << ',' << r.reference_points << ','
            << (r.within_bound ? 1 : 0) << '\n';
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out)
        throw Error("failed writing " + path.string());
}

} // namespace eulerdi
