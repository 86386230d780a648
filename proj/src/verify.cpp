#include "eulerdi/verify.hpp"

#include "eulerdi/bounds.hpp"
#include "eulerdi/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <numeric>

namespace eulerdi {

std::uint64_t SplitMix64::next()
{
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::size_t SplitMix64::below(std::size_t n)
{
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

bool ConvergenceStudy::all_within_bound() const
{
    return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow& r) { return r.within_bound; });
}

double estimate_order(const std::vector<std::pair<double, double>>& pairs)
{
    std::vector<std::pair<double, double>> logs;
    for (const auto& [dt, err] : pairs) {
        if (dt > 0.0 && err > 0.0 && std::isfinite(dt) && std::isfinite(err))
            logs.emplace_back(std::log(dt), std::log(err));
    }
    if (logs.size() < 2)
        throw Error("estimate_order: need at least two pairs with positive step size and error");
    const double n = static_cast<double>(logs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : logs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [x, y] : logs) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if (sxx == 0.0)
        throw Error("estimate_order: step sizes must not all be equal");
    return sxy / sxx;
}

ConvergenceStudy run_convergence_study(const ProblemSpec& problem, const std::vector<double>& dt_list, int refine,
                                       std::optional<double> prune_cell)
{
    if (dt_list.size() < 3)
        throw Error("run_convergence_study: need at least three step sizes");
    for (std::size_t k = 1; k < dt_list.size(); ++k) {
        if (!(dt_list[k] < dt_list[k - 1]))
            throw Error("run_convergence_study: step sizes must be strictly decreasing");
    }
    const auto& c = problem.family.constants();
    const int d = static_cast<int>(problem.family.dim());

    ConvergenceStudy study;
    study.label = problem.family.label();
    study.refine = refine;
    for (double dt : dt_list) {
        const double ratio = problem.T / dt;
        const long steps = std::lround(ratio);
        if (!(dt > 0.0) || steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
            throw Error("run_convergence_study: every step size must divide T");
        const int N = static_cast<int>(steps);
        const double cell = prune_cell.value_or(default_prune_cell(c, problem.T / N));

        const StepMaps maps = StepMaps::over_horizon(problem.family, problem.T, N);
        const ReachTube coarse = evolve_reach(maps, problem.x0, cell);
        const ReachTube reference = reference_tube(problem, refine, N, cell);

        ConvergenceRow row;
        row.dt = maps.dt();
        row.steps = N;
        row.bound = bound_reach_sets(c.K, c.L, problem.T, d, row.dt);
        row.slack = reference.reference_budget + coarse.accumulated_prune_error();
        row.prune_cell = cell;
        row.within_bound = true;
        for (int n = 0; n <= N; ++n) {
            const auto& ref_n = reference.clouds[static_cast<std::size_t>(n)];
            const auto& coarse_n = coarse.clouds[static_cast<std::size_t>(n)];
            const double err = hausdorff_finite(ref_n, coarse_n);
            row.max_error = std::max(row.max_error, err);
            row.coarse_points = std::max(row.coarse_points, static_cast<std::size_t>(coarse_n.size()));
            row.reference_points = std::max(row.reference_points, static_cast<std::size_t>(ref_n.size()));
            if (n == N)
                row.final_error = err;
        }
        row.within_bound = row.max_error <= row.bound + row.slack;
        study.rows.push_back(row);
    }

    // Finest half of the grid (rounded up).
    const std::size_t half = (study.rows.size() + 1) / 2;
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t k = study.rows.size() - half; k < study.rows.size(); ++k)
        pairs.emplace_back(study.rows[k].dt, study.rows[k].max_error);
    try {
        study.fitted_order = estimate_order(pairs);
    } catch (const Error&) {
        study.fitted_order.reset();
    }
    return study;
}

HullRepresentation<double> random_hull_point(const PointCloud& cloud, std::size_t picks, SplitMix64& rng)
{
    const auto n = static_cast<std::size_t>(cloud.size());
    picks = std::min(picks, n);
    // Partial Fisher-Yates for distinct indices.
    std::vector<Index> idx(n);
    std::iota(idx.begin(), idx.end(), Index{0});
    for (std::size_t k = 0; k < picks; ++k)
        std::swap(idx[k], idx[k + rng.below(n - k)]);
    Matrix pts(cloud.dim(), static_cast<Index>(picks));
    Vector w(static_cast<Index>(picks));
    for (std::size_t k = 0; k < picks; ++k) {
        pts.col(static_cast<Index>(k)) = cloud.point(idx[k]);
        w(static_cast<Index>(k)) = -std::log(1.0 - rng.uniform());
    }
    w /= w.sum();
    const PointCloud support(std::move(pts));
    const Vector target = support.points() * w;
    return caratheodory_reduce(target, support, w);
}

namespace {

void check_enumeration_size(int M, int k)
{
    double total = std::pow(static_cast<double>(M), k);
    if (total > static_cast<double>(kEnumerationCap))
        throw Error("inclusion check: M^M exceeds the enumeration cap");
}

} // namespace

InclusionCheck check_coco_inclusion(const ProblemSpec& problem, double dt, std::size_t samples, std::uint64_t seed,
                                    double tol)
{
    const auto& fam = problem.family;
    const int M = fam.size();
    const int d = static_cast<int>(fam.dim());
    if (M < d + 1)
        throw Error("check_coco_inclusion: needs M >= d + 1 (M = " + std::to_string(M) + ", d = " +
                    std::to_string(d) + ")");
    check_enumeration_size(M, M);
    const auto& c = fam.constants();
    const StepMaps maps(fam, dt, M);

    InclusionCheck check;
    check.theorem = "coco";
    check.label = fam.label();
    check.dt = dt;
    check.members = M;
    check.radius = coco_radius(c.K, c.L, c.S, M, dt);
    check.tolerance = tol;

    const PointCloud lhs = phi_enumerate(maps, problem.x0, M).cloud;
    std::vector<PointCloud> rhs;
    const PointCloud first = phi_image(maps, problem.x0);
    for (Index j = 0; j < first.size(); ++j)
        rhs.push_back(phi_enumerate(maps, Vector(first.point(j)), M - 1).cloud);

    SplitMix64 rng(seed);
    check.max_excess = -check.radius;
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector z = random_hull_point(lhs, static_cast<std::size_t>(d) + 3, rng).reconstruct();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& part : rhs)
            best = std::min(best, dist_point_to_hull(z, part));
        check.max_excess = std::max(check.max_excess, best - check.radius);
        ++check.sample_count;
    }
    check.pass = check.max_excess <= tol;
    return check;
}

InclusionCheck check_psi_hull_inclusion(const ProblemSpec& problem, const Vector& z, double dt, int grid_res,
                                        std::size_t samples, std::uint64_t seed, double tol)
{
    const auto& fam = problem.family;
    const int M = fam.size();
    const int d = static_cast<int>(fam.dim());
    if (z.size() != d)
        throw Error("check_psi_hull_inclusion: z dimension does not match the family");
    check_enumeration_size(M, M);
    const auto& c = fam.constants();
    const StepMaps maps(fam, dt, M);

    InclusionCheck check;
    check.theorem = "psi_hull";
    check.label = fam.label();
    check.dt = dt;
    check.members = M;
    check.radius = psi_hull_radius(c.K, c.S, M, dt);
    check.tolerance = tol;

    const PointCloud inner = phi_enumerate(maps, z, M - 1).cloud;
    const PointCloud rhs = phi_enumerate(maps, z, M).cloud;

    // Seeds of psi: every vertex of co(phi^{M-1}(z)), then random hull points.
    std::vector<Vector> seeds;
    for (Index j = 0; j < inner.size(); ++j)
        seeds.emplace_back(inner.point(j));
    SplitMix64 rng(seed);
    for (std::size_t s = 0; s < samples; ++s)
        seeds.push_back(random_hull_point(inner, static_cast<std::size_t>(d) + 3, rng).reconstruct());

    detail::DedupSet<double> lhs(d, kDedupTolerance);
    for (const auto& y : seeds) {
        const PsiSample ps = psi_sample(maps, y, grid_res);
        for (Index q = 0; q < ps.cloud.size(); ++q)
            lhs.insert(ps.cloud.point(q));
    }
    const PointCloud lhs_cloud = lhs.cloud();
    check.sample_count = static_cast<std::size_t>(lhs_cloud.size());
    check.max_excess = directed_hull_distance(lhs_cloud, rhs) - check.radius;
    check.pass = check.max_excess <= tol;

    if (c.S == 0.0) {
        check.two_sided_distance = hausdorff_hulls(lhs_cloud, rhs);
        check.two_sided_allowance = 2.0 * c.K * dt / grid_res + tol;
        check.pass = check.pass && *check.two_sided_distance <= *check.two_sided_allowance;
    }
    return check;
}

bool Report::all_pass() const
{
    return std::all_of(studies.begin(), studies.end(),
                       [](const ConvergenceStudy& s) { return s.all_within_bound(); }) &&
           std::all_of(checks.begin(), checks.end(), [](const InclusionCheck& c) { return c.pass; }) &&
           std::all_of(tracks.begin(), tracks.end(), [](const TrackReport& t) { return t.within_bound(); });
}

bool emit_report(const Report& report, const std::filesystem::path& dir)
{
    if (report.empty())
        throw Error("nothing to report");
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    const bool pass = report.all_pass();
    j["verdict"] = pass ? "pass" : "fail";
    j["studies"] = nlohmann::json::array();
    for (std::size_t k = 0; k < report.studies.size(); ++k) {
        j["studies"].push_back(to_json(report.studies[k]));
        std::ostringstream csv;
        write_study_csv(csv, report.studies[k]);
        write_text_file(dir / ("study_" + std::to_string(k) + "_" + report.studies[k].label + ".csv"), csv.str());
    }
    j["inclusion_checks"] = nlohmann::json::array();
    for (const auto& c : report.checks)
        j["inclusion_checks"].push_back(to_json(c));
    if (!report.checks.empty()) {
        std::ostringstream csv;
        csv << "theorem,label,dt,members,sample_count,radius,max_excess,tolerance,pass\n";
        csv.precision(17);
        for (const auto& c : report.checks) {
            csv << c.theorem << ',' << c.label << ',' << c.dt << ',' << c.members << ',' << c.sample_count << ','
                << c.radius << ',' << c.max_excess << ',' << c.tolerance << ',' << (c.pass ? 1 : 0) << '\n';
        }
        write_text_file(dir / "inclusion_checks.csv", csv.str());
    }
    j["tracks"] = nlohmann::json::array();
    for (const auto& t : report.tracks)
        j["tracks"].push_back(to_json(t));
    write_text_file(dir / "report.json", j.dump(2) + "\n");
    return pass;
}

} // namespace eulerdi
