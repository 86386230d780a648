#include "eulerdi/tracking.hpp"

#include "eulerdi/bounds.hpp"
#include "eulerdi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

namespace eulerdi {

namespace {

void check_simplex(const Vector& w, int members)
{
    if (w.size() != members || !w.allFinite() || (w.array() < -1e-12).any() || std::abs(w.sum() - 1.0) > 1e-12)
        throw Error("weight schedule produced weights off the simplex");
}

void check_compatible(const StepMaps& maps, const ReferencePath& ref)
{
    if (ref.states.empty())
        throw Error("reference path is empty");
    if (std::abs(ref.dt - maps.dt()) > 1e-12 * std::max(1.0, maps.dt()))
        throw Error("reference path spacing does not match the step size");
    if (ref.states.front().size() != maps.family().dim())
        throw Error("reference path dimension does not match the family");
}

struct Candidate {
    DiscretePath path;
    double worst_score = 0.0;
    double last_score = 0.0;
};

bool better(const Candidate& a, const Candidate& b)
{
    return std::tie(a.worst_score, a.last_score, a.path.controls) <
           std::tie(b.worst_score, b.last_score, b.path.controls);
}

using Scorer = std::function<double(const Vector& candidate, const Vector& target)>;

/// Beam search over member sequences. A candidate xi_{n+1} is scored against
/// eta_{n + lookahead + 1}; once that index passes N the path is completed
/// with member 0. Returns the lowest-deviation completed path.
DiscretePath beam_track(const StepMaps& maps, const ReferencePath& ref, const std::vector<Vector>& eta,
                        int lookahead, int beam, const Scorer& score)
{
    const int N = ref.steps();
    const int M = maps.family().size();
    std::vector<Candidate> frontier(1);
    frontier.front().path.states.push_back(ref.states.front());

    const int scored_steps = std::max(0, N - lookahead);
    for (int n = 0; n < scored_steps; ++n) {
        const Vector& target = eta[static_cast<std::size_t>(n + lookahead + 1)];
        std::vector<Candidate> expanded;
        for (const auto& cand : frontier) {
            for (int i = 0; i < M; ++i) {
                Candidate next = cand;
                Vector y = phi_step(maps, cand.path.states.back(), i);
                next.last_score = score(y, target);
                next.worst_score = std::max(cand.worst_score, next.last_score);
                next.path.states.push_back(std::move(y));
                next.path.controls.push_back(i);
                expanded.push_back(std::move(next));
            }
        }
        std::stable_sort(expanded.begin(), expanded.end(), better);
        if (static_cast<int>(expanded.size()) > beam)
            expanded.resize(static_cast<std::size_t>(beam));
        frontier = std::move(expanded);
    }

    const DiscretePath* best = nullptr;
    double best_dev = 0.0;
    for (auto& cand : frontier) {
        while (cand.path.steps() < N) {
            cand.path.states.push_back(phi_step(maps, cand.path.states.back(), 0));
            cand.path.controls.push_back(0);
        }
        const double dev = path_error(ref, cand.path);
        if (!best || dev < best_dev) {
            best = &cand.path;
            best_dev = dev;
        }
    }
    return *best;
}

/// Runs beam widths 1..beam and keeps the best completed path, so a wider
/// beam can never report a larger deviation than a narrower one.
DiscretePath monotone_beam_track(const StepMaps& maps, const ReferencePath& ref, const std::vector<Vector>& eta,
                                 int lookahead, int beam, const Scorer& score)
{
    if (beam < 1)
        throw Error("beam width must be at least 1");
    DiscretePath best = beam_track(maps, ref, eta, lookahead, 1, score);
    double best_dev = path_error(ref, best);
    for (int w = 2; w <= beam; ++w) {
        DiscretePath p = beam_track(maps, ref, eta, lookahead, w, score);
        const double dev = path_error(ref, p);
        if (dev < best_dev) {
            best = std::move(p);
            best_dev = dev;
        }
    }
    return best;
}

/// Composed psi samples: psi^k(x) with every step drawn from the simplex grid.
PointCloud sampled_psi_power(const StepMaps& maps, const Vector& x, int k, int grid_res)
{
    PointCloud current = PointCloud::singleton(x);
    for (int s = 0; s < k; ++s) {
        detail::DedupSet<double> next(x.size(), kDedupTolerance);
        for (Index j = 0; j < current.size(); ++j) {
            const PsiSample ps = psi_sample(maps, Vector(current.point(j)), grid_res);
            for (Index q = 0; q < ps.cloud.size(); ++q)
                next.insert(ps.cloud.point(q));
        }
        current = next.cloud();
    }
    return current;
}

double sampling_slack(const StepMaps& maps, int steps, int grid_res)
{
    return 2.0 * maps.family().constants().K * maps.dt() / grid_res * steps;
}

} // namespace

WeightSchedule WeightSchedule::pure_member(int i, int members)
{
    Vector w = Vector::Zero(members);
    if (i < 0 || i >= members)
        throw Error("pure_member: member index out of range");
    w(i) = 1.0;
    return {"pure member " + std::to_string(i), [w](long, double) { return w; }};
}

WeightSchedule WeightSchedule::chattering(int i, int j, int members, int period)
{
    if (i < 0 || i >= members || j < 0 || j >= members)
        throw Error("chattering: member index out of range");
    if (period < 1)
        throw Error("chattering: period must be at least 1");
    Vector wi = Vector::Zero(members);
    Vector wj = Vector::Zero(members);
    wi(i) = 1.0;
    wj(j) = 1.0;
    std::ostringstream os;
    os << "chattering " << i << "/" << j << " period " << period;
    return {os.str(), [=](long step, double) { return ((step / period) % 2 == 0) ? wi : wj; }};
}

WeightSchedule WeightSchedule::smooth_blend(int i, int j, int members, double T)
{
    if (i < 0 || i >= members || j < 0 || j >= members)
        throw Error("smooth_blend: member index out of range");
    if (!(T > 0.0))
        throw Error("smooth_blend: horizon must be positive");
    std::ostringstream os;
    os << "smooth blend " << i << "/" << j;
    return {os.str(), [=](long, double t) {
                Vector w = Vector::Zero(members);
                const double a = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * t / T));
                w(i) += a;
                w(j) += 1.0 - a;
                return w;
            }};
}

ReferencePath make_reference(const ProblemSpec& problem, int steps, const WeightSchedule& schedule, int refine)
{
    if (refine < 8)
        throw Error("make_reference: refine must be at least 8");
    if (steps < 1)
        throw Error("make_reference: need at least one coarse step");
    const auto& fam = problem.family;
    const double dt = problem.T / steps;
    const double h = dt / refine;
    ReferencePath ref;
    ref.dt = dt;
    ref.states.push_back(problem.x0);
    Vector x = problem.x0;
    long k = 0;
    for (int n = 0; n < steps; ++n) {
        for (int r = 0; r < refine; ++r, ++k) {
            const Vector w = schedule.weights(k, static_cast<double>(k) * h);
            check_simplex(w, fam.size());
            x = x + h * (eval_family(fam, x).points() * w);
        }
        ref.states.push_back(x);
    }
    std::ostringstream os;
    os << "fine relaxed Euler, refine=" << refine << ", schedule: " << schedule.description;
    ref.provenance = os.str();
    return ref;
}

double path_error(const ReferencePath& ref, const DiscretePath& path)
{
    if (ref.states.size() != path.states.size())
        throw Error("path_error: reference and path have different lengths");
    double worst = 0.0;
    for (std::size_t n = 0; n < ref.states.size(); ++n)
        worst = std::max(worst, (ref.states[n] - path.states[n]).norm());
    return worst;
}

double replay_defect(const StepMaps& maps, const DiscretePath& path)
{
    double worst = 0.0;
    for (int n = 0; n < path.steps(); ++n) {
        const Vector& x = path.states[static_cast<std::size_t>(n)];
        Vector next;
        if (path.relaxed()) {
            next = x + maps.dt() * (eval_family(maps.family(), x).points() * path.relaxed_controls[static_cast<std::size_t>(n)]);
        } else {
            next = phi_step(maps, x, path.controls[static_cast<std::size_t>(n)]);
        }
        worst = std::max(worst, (next - path.states[static_cast<std::size_t>(n + 1)]).norm());
    }
    return worst;
}

TrackResult track_relaxed(const StepMaps& maps, const ReferencePath& ref, int grid_res)
{
    check_compatible(maps, ref);
    const int N = ref.steps();
    DiscretePath path;
    path.states.push_back(ref.states.front());
    for (int n = 0; n < N; ++n) {
        const PsiSample ps = psi_sample(maps, path.states.back(), grid_res);
        Index best = 0;
        (ps.cloud.points().colwise() - ref.states[static_cast<std::size_t>(n + 1)]).colwise().squaredNorm().minCoeff(&best);
        path.states.push_back(ps.cloud.point(best));
        path.relaxed_controls.push_back(ps.weights[static_cast<std::size_t>(best)]);
    }
    if (N == 0)
        path.relaxed_controls.clear();

    const auto& c = maps.family().constants();
    TrackReport report;
    report.method = "relaxed";
    report.max_deviation = path_error(ref, path);
    report.theoretical_bound = N > 0 ? bound_convex_path(c.K, c.L, N * maps.dt(), maps.dt()) : 0.0;
    report.slack = sampling_slack(maps, N, grid_res);
    report.grid_res = grid_res;
    return {std::move(path), report};
}

TrackResult track_nonconvex(const StepMaps& maps, const ReferencePath& ref, const NonconvexOptions& options)
{
    check_compatible(maps, ref);
    const int d = static_cast<int>(maps.family().dim());
    const int lookahead = options.lookahead.value_or(d);
    if (lookahead < 0)
        throw Error("track_nonconvex: lookahead must be nonnegative");
    const TrackResult relaxed = track_relaxed(maps, ref, options.grid_res);
    const auto& eta = relaxed.path.states;

    const Scorer score = [&](const Vector& y, const Vector& target) {
        if (lookahead == 0)
            return (target - y).norm();
        return dist_point_to_hull(target, sampled_psi_power(maps, y, lookahead, options.grid_res));
    };
    DiscretePath path = monotone_beam_track(maps, ref, eta, lookahead, options.beam, score);

    const int N = ref.steps();
    const auto& c = maps.family().constants();
    TrackReport report;
    report.method = "nonconvex";
    report.max_deviation = path_error(ref, path);
    report.theoretical_bound = N > 0 ? bound_nonconvex_path(c.K, c.L, N * maps.dt(), d, maps.dt()) : 0.0;
    report.slack = relaxed.report.slack;
    report.lookahead_depth = lookahead;
    report.beam_width = options.beam;
    report.grid_res = options.grid_res;
    return {std::move(path), report};
}

TrackResult track_controls(const StepMaps& maps, const ReferencePath& ref, int grid_res)
{
    check_compatible(maps, ref);
    const int d = static_cast<int>(maps.family().dim());
    const int M = maps.family().size();
    if (M < d + 1)
        throw Error("track_controls: needs M >= d + 1 (M = " + std::to_string(M) + ", d = " + std::to_string(d) + ")");
    const int lookahead = M - 1;
    const TrackResult relaxed = track_relaxed(maps, ref, grid_res);

    const Scorer score = [&](const Vector& y, const Vector& target) {
        return dist_point_to_hull(target, phi_enumerate(maps, y, lookahead).cloud);
    };
    DiscretePath path = monotone_beam_track(maps, ref, relaxed.path.states, lookahead, 1, score);

    const int N = ref.steps();
    const auto& c = maps.family().constants();
    TrackReport report;
    report.method = "controls";
    report.max_deviation = path_error(ref, path);
    report.theoretical_bound = N > 0 ? bound_controls_path(c.K, c.L, c.S, N * maps.dt(), M, maps.dt()).total() : 0.0;
    report.slack = relaxed.report.slack;
    report.lookahead_depth = lookahead;
    report.grid_res = grid_res;
    return {std::move(path), report};
}

} // namespace eulerdi
