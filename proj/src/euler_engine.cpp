#include "eulerdi/euler_engine.hpp"

#include "eulerdi/bounds.hpp"
#include "eulerdi/geometry.hpp"

#include <cmath>
#include <unordered_set>

namespace eulerdi {

StepMaps::StepMaps(ControlFamily family, double dt, int steps)
    : family_(std::move(family)), dt_(dt), steps_(steps)
{
    if (!(dt >= 0.0) || !std::isfinite(dt))
        throw Error("step size dt must be finite and nonnegative");
    if (steps < 0)
        throw Error("number of steps N must be nonnegative");
}

StepMaps StepMaps::over_horizon(ControlFamily family, double T, int steps)
{
    if (!(T > 0.0))
        throw Error("horizon T must be positive");
    if (steps < 1)
        throw Error("number of steps N must be at least 1");
    return StepMaps(std::move(family), T / steps, steps);
}

Vector phi_step(const StepMaps& maps, const Vector& x, int i)
{
    return x + maps.dt() * maps.family().value(i, x);
}

PointCloud phi_image(const StepMaps& maps, const Vector& x)
{
    return PointCloud((maps.dt() * eval_family(maps.family(), x).points()).colwise() + x);
}

std::vector<Vector> simplex_grid(int members, int grid_res)
{
    if (members < 1)
        throw Error("simplex_grid: need at least one member");
    if (grid_res < 1)
        throw Error("simplex_grid: grid resolution must be at least 1");
    std::vector<Vector> out;
    std::vector<int> parts(static_cast<std::size_t>(members), 0);
    // Depth-first over the leading parts, smallest first, gives lexicographic order.
    auto recurse = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == members - 1) {
            parts[static_cast<std::size_t>(pos)] = remaining;
            Vector w(members);
            for (int k = 0; k < members; ++k)
                w(k) = static_cast<double>(parts[static_cast<std::size_t>(k)]) / grid_res;
            out.push_back(std::move(w));
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            parts[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    recurse(recurse, 0, grid_res);
    return out;
}

PsiSample psi_sample(const StepMaps& maps, const Vector& x, int grid_res)
{
    const Matrix velocities = eval_family(maps.family(), x).points();
    std::vector<Vector> weights = simplex_grid(maps.family().size(), grid_res);
    Matrix pts(x.size(), static_cast<Index>(weights.size()));
    for (std::size_t j = 0; j < weights.size(); ++j)
        pts.col(static_cast<Index>(j)) = x + maps.dt() * (velocities * weights[j]);
    return {PointCloud(std::move(pts)), std::move(weights)};
}

PhiEnumeration phi_enumerate(const StepMaps& maps, const Vector& x, int k, std::size_t cap)
{
    if (k < 0)
        throw Error("phi_enumerate: k must be nonnegative");
    const auto M = static_cast<std::size_t>(maps.family().size());
    std::size_t total = 1;
    for (int s = 0; s < k; ++s) {
        if (total > cap / M)
            throw Error("phi_enumerate: M^k exceeds the enumeration cap of " + std::to_string(cap) +
                        " points; use evolve_reach with a positive prune cell instead");
        total *= M;
    }
    std::vector<Vector> points{x};
    std::vector<std::vector<int>> seqs{{}};
    for (int s = 0; s < k; ++s) {
        std::vector<Vector> next_points;
        std::vector<std::vector<int>> next_seqs;
        next_points.reserve(points.size() * M);
        next_seqs.reserve(points.size() * M);
        for (std::size_t j = 0; j < points.size(); ++j) {
            for (int i = 0; i < static_cast<int>(M); ++i) {
                next_points.push_back(phi_step(maps, points[j], i));
                auto seq = seqs[j];
                seq.push_back(i);
                next_seqs.push_back(std::move(seq));
            }
        }
        points = std::move(next_points);
        seqs = std::move(next_seqs);
    }
    return {PointCloud::from_points(points), std::move(seqs)};
}

double default_prune_cell(const FamilyConstants& c, double dt)
{
    return dt * dt * c.K * c.L / 4.0;
}

ReachTube evolve_reach(const StepMaps& maps, const Vector& x0, double prune_cell, std::size_t cap)
{
    if (!(prune_cell >= 0.0) || !std::isfinite(prune_cell))
        throw Error("evolve_reach: prune cell must be finite and nonnegative");
    if (x0.size() != maps.family().dim())
        throw Error("evolve_reach: x0 dimension does not match the family");
    const Index d = x0.size();
    const auto& c = maps.family().constants();
    const double growth = 1.0 + c.L * maps.dt();
    const double per_step = (prune_cell > 0.0 ? prune_cell : kDedupTolerance) * std::sqrt(static_cast<double>(d));

    ReachTube tube;
    tube.dt = maps.dt();
    tube.prune_cell = prune_cell;
    tube.clouds.push_back(PointCloud::singleton(x0));
    tube.prune_error.push_back(0.0);

    const int M = maps.family().size();
    for (int n = 0; n < maps.steps(); ++n) {
        const PointCloud& current = tube.clouds.back();
        std::vector<Matrix> images;
        for (int i = 0; i < M; ++i)
            images.push_back(current.points() + maps.dt() * maps.family().values(i, current.points()));
        for (int i = 0; i < M; ++i) {
            if (!images[static_cast<std::size_t>(i)].allFinite())
                throw Error("evolve_reach: member " + std::to_string(i) + " produced a non-finite image");
        }
        const std::string overflow = "evolve_reach: cloud exceeds the cap of " + std::to_string(cap) +
                                     " points at step " + std::to_string(n + 1);
        PointCloud next;
        if (prune_cell > 0.0) {
            std::unordered_set<detail::CellKey, detail::CellKeyHash> seen;
            seen.reserve(static_cast<std::size_t>(current.size() * M));
            std::vector<double> coords;
            for (Index j = 0; j < current.size(); ++j) {
                for (const auto& img : images) {
                    const auto y = img.col(j);
                    if (seen.insert(detail::cell_of(y, prune_cell)).second)
                        coords.insert(coords.end(), y.data(), y.data() + d);
                }
                if (seen.size() > cap)
                    throw Error(overflow + "; use a larger prune cell");
            }
            next = PointCloud::from_flat(d, coords);
        } else {
            detail::DedupSet<double> set(d, kDedupTolerance);
            for (Index j = 0; j < current.size(); ++j) {
                for (const auto& img : images)
                    set.insert(img.col(j));
                if (static_cast<std::size_t>(set.size()) > cap)
                    throw Error(overflow + "; use a positive prune cell");
            }
            next = set.cloud();
        }
        tube.clouds.push_back(std::move(next));
        // Snapping moves each set by at most one cell diagonal; earlier errors
        // are propagated through phi, which is (1 + L dt)-Lipschitz.
        tube.prune_error.push_back(growth * tube.prune_error.back() + per_step);
    }
    return tube;
}

ReachTube reference_tube(const ProblemSpec& problem, int refine, int coarse_steps,
                         std::optional<double> coarse_prune_cell, std::size_t cap)
{
    if (refine < 2)
        throw Error("reference_tube: refine must be at least 2");
    if (coarse_steps < 0)
        throw Error("reference_tube: number of coarse steps must be nonnegative");
    if (coarse_steps == 0) {
        ReachTube tube;
        tube.clouds.push_back(PointCloud::singleton(problem.x0));
        tube.prune_error.push_back(0.0);
        tube.refine = refine;
        return tube;
    }
    const auto& c = problem.family.constants();
    const double coarse_dt = problem.T / coarse_steps;
    const double coarse_cell = coarse_prune_cell.value_or(default_prune_cell(c, coarse_dt));
    const double fine_cell = coarse_cell / refine;
    const StepMaps fine(problem.family, problem.T / (static_cast<double>(coarse_steps) * refine),
                        coarse_steps * refine);
    ReachTube full = evolve_reach(fine, problem.x0, fine_cell, cap);

    ReachTube tube;
    tube.dt = coarse_dt;
    tube.prune_cell = fine_cell;
    tube.refine = refine;
    for (int n = 0; n <= coarse_steps; ++n) {
        const auto k = static_cast<std::size_t>(n) * static_cast<std::size_t>(refine);
        tube.clouds.push_back(std::move(full.clouds[k]));
        tube.prune_error.push_back(full.prune_error[k]);
    }
    tube.reference_budget =
        bound_reach_sets(c.K, c.L, problem.T, static_cast<int>(problem.family.dim()), fine.dt()) +
        tube.accumulated_prune_error();
    return tube;
}

} // namespace eulerdi
