#include "doctest.h"

#include "eulerdi/bounds.hpp"
#include "eulerdi/tracking.hpp"

#include <cmath>
#include <limits>

using namespace eulerdi;

namespace {

/// Smallest achievable max deviation over all M^N member sequences.
double exhaustive_min_deviation(const StepMaps& maps, const ReferencePath& ref)
{
    const int N = ref.steps();
    const int M = maps.family().size();
    double best = std::numeric_limits<double>::infinity();
    long total = 1;
    for (int n = 0; n < N; ++n)
        total *= M;
    for (long code = 0; code < total; ++code) {
        Vector x = ref.states.front();
        double worst = 0.0;
        long c = code;
        for (int n = 0; n < N && worst < best; ++n) {
            x = x + maps.dt() * maps.family().value(static_cast<int>(c % M), x);
            c /= M;
            worst = std::max(worst, (x - ref.states[static_cast<std::size_t>(n + 1)]).norm());
        }
        best = std::min(best, worst);
    }
    return best;
}

ReferencePath zero_reference(int N, double dt)
{
    ReferencePath ref;
    ref.dt = dt;
    ref.states.assign(static_cast<std::size_t>(N + 1), Vector::Zero(1));
    return ref;
}

std::vector<WeightSchedule> schedules_for(const ProblemSpec& p)
{
    const int M = p.family.size();
    std::vector<WeightSchedule> out{WeightSchedule::pure_member(0, M)};
    if (M > 1) {
        out.push_back(WeightSchedule::chattering(0, 1, M));
        out.push_back(WeightSchedule::chattering(0, M - 1, M, 3));
        out.push_back(WeightSchedule::smooth_blend(0, 1, M, p.T));
    }
    return out;
}

} // namespace

TEST_CASE("make_reference with a pure member is that member's fine Euler flow")
{
    const auto p = make_benchmark("rotation2d");
    const int N = 5, refine = 8;
    const ReferencePath ref = make_reference(p, N, WeightSchedule::pure_member(1, 2), refine);
    Vector x = p.x0;
    const double h = p.T / N / refine;
    for (int n = 0; n < N; ++n) {
        for (int r = 0; r < refine; ++r)
            x = x + h * p.family.value(1, x);
        CHECK((ref.states[static_cast<std::size_t>(n + 1)] - x).norm() <= 1e-15);
    }
    CHECK(ref.provenance.find("refine=8") != std::string::npos);
}

TEST_CASE("make_reference chattering on signs stays near zero")
{
    const auto p = make_benchmark("signs1d");
    for (int N : {10, 20, 40}) {
        for (int refine : {8, 64}) {
            const ReferencePath ref = make_reference(p, N, WeightSchedule::chattering(0, 1, 2), refine);
            for (const auto& x : ref.states)
                CHECK(std::abs(x(0)) <= (p.T / N) / refine + 1e-15);
        }
    }
}

TEST_CASE("make_reference refinement doubling on the rotation benchmark")
{
    const auto p = make_benchmark("rotation2d");
    const auto& c = p.family.constants();
    for (const auto& sched : schedules_for(p)) {
        for (int refine : {8, 16, 32}) {
            const int N = 10;
            // Chattering is tied to the fine grid, so doubling changes the solution itself.
            if (sched.description.rfind("chattering", 0) == 0)
                continue;
            const ReferencePath a = make_reference(p, N, sched, refine);
            const ReferencePath b = make_reference(p, N, sched, 2 * refine);
            double gap = 0.0;
            for (std::size_t n = 0; n < a.states.size(); ++n)
                gap = std::max(gap, (a.states[n] - b.states[n]).norm());
            INFO(sched.description << " refine=" << refine);
            CHECK(gap <= c.K * c.L * p.T * std::exp(c.L * p.T) * (p.T / N) / refine);
        }
    }
}

TEST_CASE("reference paths respect the speed limit")
{
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        for (const auto& sched : schedules_for(p)) {
            const ReferencePath ref = make_reference(p, 16, sched, 8);
            for (int n = 0; n < 16; ++n)
                CHECK((ref.states[static_cast<std::size_t>(n + 1)] - ref.states[static_cast<std::size_t>(n)]).norm() <=
                      p.family.constants().K * ref.dt + 1e-9);
        }
    }
}

TEST_CASE("make_reference rejects bad input")
{
    const auto p = make_benchmark("signs1d");
    CHECK_THROWS_AS(make_reference(p, 10, WeightSchedule::pure_member(0, 2), 4), Error);
    const WeightSchedule off{"off simplex", [](long, double) { return Vector(Eigen::Vector2d(0.7, 0.7)); }};
    CHECK_THROWS_AS(make_reference(p, 10, off, 8), Error);
    const WeightSchedule negative{"negative", [](long, double) { return Vector(Eigen::Vector2d(-0.5, 1.5)); }};
    CHECK_THROWS_AS(make_reference(p, 10, negative, 8), Error);
    CHECK_THROWS_AS(WeightSchedule::pure_member(2, 2), Error);
    CHECK_THROWS_AS(WeightSchedule::chattering(0, 1, 2, 0), Error);
}

TEST_CASE("path_error examples")
{
    ReferencePath ref;
    ref.dt = 0.1;
    ref.states = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2), Eigen::Vector2d(-1, 0.5)};
    DiscretePath same;
    same.states = ref.states;
    CHECK(path_error(ref, same) == 0.0);

    DiscretePath shifted;
    const Vector v = Eigen::Vector2d(0.3, -0.4);
    for (const auto& s : ref.states)
        shifted.states.push_back(s + v);
    CHECK(path_error(ref, shifted) == doctest::Approx(0.5));

    DiscretePath alternating;
    for (int n = 0; n <= 6; ++n)
        alternating.states.push_back(Vector::Constant(1, n % 2 ? 0.1 : 0.0));
    CHECK(path_error(zero_reference(6, 0.1), alternating) == doctest::Approx(0.1));

    DiscretePath short_path;
    short_path.states = {Eigen::Vector2d(0, 0)};
    CHECK_THROWS_AS(path_error(ref, short_path), Error);
}

TEST_CASE("track_relaxed reproduces a coarse relaxed path")
{
    const auto p = make_benchmark("affine2d");
    const int N = 12, grid = 4;
    const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
    ReferencePath ref;
    ref.dt = maps.dt();
    ref.states.push_back(p.x0);
    for (int n = 0; n < N; ++n) {
        const PsiSample ps = psi_sample(maps, ref.states.back(), grid);
        ref.states.push_back(ps.cloud.point((7 * n + 3) % ps.cloud.size()));
    }
    const TrackResult r = track_relaxed(maps, ref, grid);
    CHECK(r.report.max_deviation == 0.0);
    CHECK(r.path.relaxed());
    CHECK(replay_defect(maps, r.path) <= 1e-12);
}

TEST_CASE("track_relaxed on signs with a zero reference stays at zero")
{
    const auto p = make_benchmark("signs1d");
    for (int grid : {2, 4, 8}) {
        const StepMaps maps = StepMaps::over_horizon(p.family, p.T, 10);
        const TrackResult r = track_relaxed(maps, zero_reference(10, 0.1), grid);
        for (const auto& x : r.path.states)
            CHECK(x(0) == 0.0);
        for (const auto& w : r.path.relaxed_controls)
            CHECK(w == Eigen::Vector2d(0.5, 0.5));
    }
}

TEST_CASE("track_relaxed breaks ties toward the lexicographically smallest weights")
{
    // The target 0 sits midway between -0.1 and 0.1; the weights (0, 1) come first.
    const auto p = make_benchmark("signs1d");
    const StepMaps maps = StepMaps::over_horizon(p.family, p.T, 10);
    const TrackResult r = track_relaxed(maps, zero_reference(10, 0.1), 1);
    CHECK(r.path.relaxed_controls.front() == Eigen::Vector2d(0, 1));
    CHECK(r.path.states[1](0) == doctest::Approx(0.1));
}

TEST_CASE("track_relaxed with a single member is classical Euler")
{
    const auto p = make_benchmark("rotation1");
    const auto& c = p.family.constants();
    for (int N : {10, 20, 40}) {
        const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
        const ReferencePath ref = make_reference(p, N, WeightSchedule::pure_member(0, 1), 64);
        const TrackResult r = track_relaxed(maps, ref, 8);
        CHECK(r.report.max_deviation <= bound_convex_path(c.K, c.L, p.T, maps.dt()));
        Vector x = p.x0;
        for (int n = 0; n < N; ++n) {
            x = phi_step(maps, x, 0);
            CHECK(r.path.states[static_cast<std::size_t>(n + 1)] == x);
        }
    }
}

TEST_CASE("track_nonconvex with a single member is forced")
{
    const auto p = make_benchmark("rotation1");
    const StepMaps maps = StepMaps::over_horizon(p.family, p.T, 20);
    const ReferencePath ref = make_reference(p, 20, WeightSchedule::pure_member(0, 1), 64);
    const TrackResult a = track_relaxed(maps, ref, 8);
    const TrackResult b = track_nonconvex(maps, ref);
    CHECK(b.report.max_deviation == a.report.max_deviation);
    CHECK(b.report.lookahead_depth == 2);
}

TEST_CASE("track_nonconvex against an exhaustive search over sign sequences")
{
    for (const std::string name : {"signs1d", "rotation2d"}) {
        const auto p = make_benchmark(name);
        const auto& c = p.family.constants();
        const int d = static_cast<int>(p.family.dim());
        for (int N : {4, 8, 10, 12}) {
            const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
            for (const auto& sched : schedules_for(p)) {
                const ReferencePath ref = make_reference(p, N, sched, 64);
                const double optimum = exhaustive_min_deviation(maps, ref);
                const double bound = bound_nonconvex_path(c.K, c.L, p.T, d, maps.dt());
                const TrackResult r = track_nonconvex(maps, ref);
                INFO(name << " N=" << N << " " << sched.description);
                CHECK(optimum <= bound);
                CHECK(r.report.max_deviation >= optimum - 1e-12);
                CHECK(r.report.max_deviation <= bound);
            }
        }
    }
}

TEST_CASE("signs with a zero reference: the optimum alternates")
{
    const auto p = make_benchmark("signs1d");
    const StepMaps maps = StepMaps::over_horizon(p.family, p.T, 10);
    CHECK(exhaustive_min_deviation(maps, zero_reference(10, 0.1)) == doctest::Approx(0.1));
    const TrackResult r = track_nonconvex(maps, zero_reference(10, 0.1), {std::nullopt, 4, 8});
    CHECK(r.report.max_deviation >= 0.1 - 1e-12);
    CHECK(r.report.max_deviation <= bound_nonconvex_path(1, 0, 1, 1, 0.1));
}

TEST_CASE("wider beams never increase the deviation")
{
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        const int N = 10;
        const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
        for (const auto& sched : schedules_for(p)) {
            const ReferencePath ref = make_reference(p, N, sched, 16);
            double previous = std::numeric_limits<double>::infinity();
            for (int beam = 1; beam <= 4; ++beam) {
                const TrackResult r = track_nonconvex(maps, ref, {1, beam, 4});
                CHECK(r.report.max_deviation <= previous);
                CHECK(r.report.beam_width == beam);
                previous = r.report.max_deviation;
            }
        }
    }
}

TEST_CASE("tracked paths replay exactly and stay within their bounds")
{
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        const auto& c = p.family.constants();
        const int d = static_cast<int>(p.family.dim());
        for (int N : {10, 20}) {
            const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
            for (const auto& sched : schedules_for(p)) {
                const ReferencePath ref = make_reference(p, N, sched, 32);
                INFO(name << " N=" << N << " " << sched.description);

                const TrackResult rel = track_relaxed(maps, ref, 8);
                CHECK(replay_defect(maps, rel.path) <= 1e-12);
                CHECK(rel.path.states.front() == p.x0);
                CHECK(rel.report.within_bound());
                CHECK(rel.report.theoretical_bound == bound_convex_path(c.K, c.L, p.T, maps.dt()));
                CHECK(std::abs(rel.report.max_deviation - path_error(ref, rel.path)) <= 1e-12);

                const TrackResult non = track_nonconvex(maps, ref);
                CHECK(replay_defect(maps, non.path) <= 1e-12);
                CHECK(non.path.controls.size() == static_cast<std::size_t>(N));
                CHECK(non.report.max_deviation <= non.report.theoretical_bound);
                CHECK(std::abs(non.report.max_deviation - path_error(ref, non.path)) <= 1e-12);

                if (p.family.size() >= d + 1 && c.L > 0.0) {
                    const TrackResult ctl = track_controls(maps, ref);
                    CHECK(replay_defect(maps, ctl.path) <= 1e-12);
                    CHECK(ctl.report.max_deviation <= ctl.report.theoretical_bound);
                }
            }
        }
    }
}

TEST_CASE("track_controls on the affine benchmark")
{
    const auto p = make_benchmark("affine2d");
    const auto& c = p.family.constants();
    for (int N : {10, 20}) {
        const StepMaps maps = StepMaps::over_horizon(p.family, p.T, N);
        for (int member = 0; member < 3; ++member) {
            const ReferencePath ref = make_reference(p, N, WeightSchedule::pure_member(member, 3), 64);
            const TrackResult r = track_controls(maps, ref);
            CHECK(r.report.theoretical_bound ==
                  bound_controls_path(c.K, c.L, c.S, p.T, 3, maps.dt()).total());
            CHECK(r.report.max_deviation <= r.report.theoretical_bound);
            CHECK(r.report.lookahead_depth == 2);
        }
    }
}

TEST_CASE("track_controls requires M >= d + 1")
{
    const auto p = make_benchmark("rotation2d");
    const StepMaps maps = StepMaps::over_horizon(p.family, p.T, 10);
    const ReferencePath ref = make_reference(p, 10, WeightSchedule::pure_member(0, 2), 8);
    try {
        track_controls(maps, ref);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("M >= d + 1") != std::string::npos);
    }
}

TEST_CASE("tracking rejects mismatched references")
{
    const auto p = make_benchmark("signs1d");
    const StepMaps maps = StepMaps::over_horizon(p.family, p.T, 10);
    CHECK_THROWS_AS(track_relaxed(maps, zero_reference(10, 0.05), 4), Error);
    ReferencePath wrong_dim = zero_reference(10, 0.1);
    wrong_dim.states.assign(11, Vector::Zero(2));
    CHECK_THROWS_AS(track_nonconvex(maps, wrong_dim), Error);
    CHECK_THROWS_AS(track_nonconvex(maps, zero_reference(10, 0.1), {std::nullopt, 0, 8}), Error);
}
