#ifndef EULERDI_EULER_ENGINE_HPP
#define EULERDI_EULER_ENGINE_HPP

#include "eulerdi/inclusion_model.hpp"
#include "eulerdi/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace eulerdi {

inline constexpr std::size_t kEnumerationCap = 1'000'000;

/// phi(x) = x + dt F(x) and psi(x) = x + dt co F(x) for a fixed step size.
class StepMaps {
public:
    /// dt >= 0 so that degenerate (dt = 0) inclusion checks stay expressible.
    StepMaps(ControlFamily family, double dt, int steps);

    /// dt = T / N.
    static StepMaps over_horizon(ControlFamily family, double T, int steps);

    const ControlFamily& family() const { return family_; }
    double dt() const { return dt_; }
    int steps() const { return steps_; }
    double horizon() const { return dt_ * steps_; }

private:
    ControlFamily family_;
    double dt_;
    int steps_;
};

/// x + dt f_i(x).
Vector phi_step(const StepMaps& maps, const Vector& x, int i);

/// All M images phi(x, i) in member order.
PointCloud phi_image(const StepMaps& maps, const Vector& x);

/// All weight vectors k / grid_res with k a composition of grid_res into M
/// nonnegative parts, in ascending lexicographic order.
std::vector<Vector> simplex_grid(int members, int grid_res);

struct PsiSample {
    PointCloud cloud;
    std::vector<Vector> weights; // weights[j] produced cloud.point(j)
};

/// Sample of psi(x) on the simplex grid of resolution grid_res.
PsiSample psi_sample(const StepMaps& maps, const Vector& x, int grid_res);

struct PhiEnumeration {
    PointCloud cloud;
    std::vector<std::vector<int>> sequences; // control indices (i_1, ..., i_k) per point
};

/// All M^k iterated images phi^k(x), lexicographic in the index sequences.
PhiEnumeration phi_enumerate(const StepMaps& maps, const Vector& x, int k, std::size_t cap = kEnumerationCap);

/// Sampled approximation of the discrete reachable sets D_0..D_N.
struct ReachTube {
    std::vector<PointCloud> clouds;
    double dt = 0.0;
    double prune_cell = 0.0;
    /// prune_error[n] bounds H(clouds[n], exact set at step n).
    std::vector<double> prune_error;
    /// Reference tubes only: certified distance to the continuous reachable sets.
    double reference_budget = 0.0;
    int refine = 1;

    double accumulated_prune_error() const { return prune_error.empty() ? 0.0 : prune_error.back(); }
};

/// dt^2 K L / 4.
double default_prune_cell(const FamilyConstants& c, double dt);

/// Pushes {x0} through phi for maps.steps() steps, snapping each new cloud to
/// the grid of size prune_cell (first point per cell wins). prune_cell = 0
/// keeps every image up to the 1e-12 deduplication tolerance.
ReachTube evolve_reach(const StepMaps& maps, const Vector& x0, double prune_cell,
                       std::size_t cap = kEnumerationCap);

/// Fine-step stand-in for the continuous reachable sets at the coarse times
/// n T / coarse_steps. The fine prune cell is the coarse cell over refine.
ReachTube reference_tube(const ProblemSpec& problem, int refine, int coarse_steps,
                         std::optional<double> coarse_prune_cell = std::nullopt,
                         std::size_t cap = kEnumerationCap);

} // namespace eulerdi

#endif // EULERDI_EULER_ENGINE_HPP
