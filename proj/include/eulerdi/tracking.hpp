#ifndef EULERDI_TRACKING_HPP
#define EULERDI_TRACKING_HPP

#include "eulerdi/euler_engine.hpp"
#include "eulerdi/inclusion_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace eulerdi {

/// Solution of the relaxed inclusion sampled at the coarse times n dt.
struct ReferencePath {
    double dt = 0.0;
    std::vector<Vector> states;
    std::string provenance;

    int steps() const { return static_cast<int>(states.size()) - 1; }
};

/// Convex weights over the members as a function of (fine step index, time).
struct WeightSchedule {
    std::string description;
    std::function<Vector(long fine_step, double t)> weights;

    static WeightSchedule pure_member(int i, int members);
    /// Alternates between members i and j every `period` fine steps.
    static WeightSchedule chattering(int i, int j, int members, int period = 1);
    /// Weight moves between members i and j as (1 + cos(2 pi t / T)) / 2.
    static WeightSchedule smooth_blend(int i, int j, int members, double T);
};

/// Integrates x' = sum_i w_i(t) f_i(x) with Euler steps dt / refine and keeps
/// every refine-th state.
ReferencePath make_reference(const ProblemSpec& problem, int steps, const WeightSchedule& schedule, int refine = 64);

/// A Forward Euler path: either member indices (phi) or weight vectors (psi).
struct DiscretePath {
    std::vector<Vector> states;
    std::vector<int> controls;           // phi paths
    std::vector<Vector> relaxed_controls; // psi paths

    bool relaxed() const { return !relaxed_controls.empty(); }
    int steps() const { return static_cast<int>(states.size()) - 1; }
};

struct TrackReport {
    double max_deviation = 0.0;
    double theoretical_bound = 0.0;
    /// Sampling slack granted on top of the bound, kept separate from it.
    double slack = 0.0;
    int lookahead_depth = 0;
    int beam_width = 1;
    int grid_res = 0;
    std::string method;

    bool within_bound() const { return max_deviation <= theoretical_bound + slack; }
};

struct TrackResult {
    DiscretePath path;
    TrackReport report;
};

/// max_n |ref_n - path_n|.
double path_error(const ReferencePath& ref, const DiscretePath& path);

/// Largest per-step defect when the path is replayed through phi / psi.
double replay_defect(const StepMaps& maps, const DiscretePath& path);

/// Greedy relaxed path: each step takes the psi-grid point nearest the reference.
TrackResult track_relaxed(const StepMaps& maps, const ReferencePath& ref, int grid_res);

struct NonconvexOptions {
    std::optional<int> lookahead; // defaults to the dimension d
    int beam = 1;
    int grid_res = 8;
};

/// Pure-member path steered by lookahead onto a relaxed path.
TrackResult track_nonconvex(const StepMaps& maps, const ReferencePath& ref, const NonconvexOptions& options = {});

/// Pure-member path for M >= d + 1 scored against exact hulls of phi^{M-1}.
TrackResult track_controls(const StepMaps& maps, const ReferencePath& ref, int grid_res = 8);

} // namespace eulerdi

#endif // EULERDI_TRACKING_HPP
