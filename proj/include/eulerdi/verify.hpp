#ifndef EULERDI_VERIFY_HPP
#define EULERDI_VERIFY_HPP

#include "eulerdi/euler_engine.hpp"
#include "eulerdi/geometry.hpp"
#include "eulerdi/inclusion_model.hpp"
#include "eulerdi/tracking.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eulerdi {

inline constexpr std::uint64_t kDefaultSeed = 20240611;
inline constexpr double kInclusionTolerance = 1e-6 + kHullTolerance;

/// Deterministic 64-bit generator (splitmix64) with platform-independent
/// floating-point draws, so reports are byte-identical across toolchains.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double uniform(); // [0, 1)
    std::size_t below(std::size_t n);

private:
    std::uint64_t state_;
};

struct ConvergenceRow {
    double dt = 0.0;
    int steps = 0;
    double max_error = 0.0;   // max_n H(reference_n, coarse_n)
    double final_error = 0.0; // error at n = N
    double bound = 0.0;       // reachable-set bound at this dt
    double slack = 0.0;       // reference budget + coarse pruning error
    double prune_cell = 0.0;
    std::size_t coarse_points = 0;
    std::size_t reference_points = 0;
    bool within_bound = false;
};

struct ConvergenceStudy {
    std::string label;
    int refine = 0;
    std::vector<ConvergenceRow> rows;
    /// Slope over the finest half of the grid; empty when the errors vanish.
    std::optional<double> fitted_order;

    bool all_within_bound() const;
};

/// For each dt: coarse tube vs a refined reference tube, Hausdorff error at
/// every coarse time, and the reachable-set bound with its slack.
/// `prune_cell` empty selects dt^2 K L / 4 per step size.
ConvergenceStudy run_convergence_study(const ProblemSpec& problem, const std::vector<double>& dt_list, int refine,
                                       std::optional<double> prune_cell = std::nullopt);

/// Least-squares slope of log(error) against log(dt); pairs with a
/// nonpositive entry are dropped.
double estimate_order(const std::vector<std::pair<double, double>>& pairs);

struct InclusionCheck {
    std::string theorem; // "coco" or "psi_hull"
    std::string label;
    double dt = 0.0;
    int members = 0;
    std::size_t sample_count = 0;
    double radius = 0.0;     // permitted inclusion radius
    double max_excess = 0.0; // max over samples of (distance to the right side) - radius
    double tolerance = 0.0;
    /// S = 0 only: two-sided hull distance and what it is allowed to be.
    std::optional<double> two_sided_distance;
    std::optional<double> two_sided_allowance;
    bool pass = false;
};

/// co(phi^M(x0)) inside the union over x in phi(x0) of co(phi^{M-1}(x)) + R B,
/// checked on random Caratheodory combinations of phi^M(x0).
InclusionCheck check_coco_inclusion(const ProblemSpec& problem, double dt, std::size_t samples,
                                    std::uint64_t seed = kDefaultSeed, double tol = kInclusionTolerance);

/// psi(co(phi^{M-1}(z))) inside co(phi^M(z)) + r B, with the two-sided
/// equality checked as well when the family is affine.
InclusionCheck check_psi_hull_inclusion(const ProblemSpec& problem, const Vector& z, double dt, int grid_res,
                                        std::size_t samples, std::uint64_t seed = kDefaultSeed,
                                        double tol = kInclusionTolerance);

/// Convex combination of `picks` random points of `cloud`, reduced to at most
/// d + 1 points.
HullRepresentation<double> random_hull_point(const PointCloud& cloud, std::size_t picks, SplitMix64& rng);

struct Report {
    std::vector<ConvergenceStudy> studies;
    std::vector<InclusionCheck> checks;
    std::vector<TrackReport> tracks;

    bool empty() const { return studies.empty() && checks.empty() && tracks.empty(); }
    bool all_pass() const;
};

/// Writes report.json plus CSV tables into `dir`. Returns true iff every
/// verdict passes.
bool emit_report(const Report& report, const std::filesystem::path& dir);

} // namespace eulerdi

#endif // EULERDI_VERIFY_HPP
