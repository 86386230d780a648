#ifndef EULERDI_BOUNDS_HPP
#define EULERDI_BOUNDS_HPP

#include <optional>
#include <string>

namespace eulerdi {

// Error constants of the set-valued Forward Euler scheme. Every function
// throws eulerdi::Error on out-of-domain parameters. L = 0 is accepted (with
// e^{LT} = 1) except by bound_controls_path, whose S-term divides by L.

/// Reachable sets: (K e^{LT} (K d (d+1) + L T) + 2 K d) dt.
double bound_reach_sets(double K, double L, double T, int d, double dt);

/// Convex-valued paths: K L T e^{LT} dt.
double bound_convex_path(double K, double L, double T, double dt);

/// Nonconvex paths: K (e^{LT} d (d+1) + 2 d + L T e^{LT}) dt.
double bound_nonconvex_path(double K, double L, double T, int d, double dt);

struct ControlsPathBound {
    double dt_group;  // coefficient group multiplying dt, times dt
    double dt2_group; // coefficient group multiplying dt^2, times dt^2

    double total() const { return dt_group + dt2_group; }
};

/// Finitely many smooth controls (M >= 2, L > 0).
ControlsPathBound bound_controls_path(double K, double L, double S, double T, int M, double dt);

/// Radius R of the hull-of-iterates inclusion for M smooth controls.
double coco_radius(double K, double L, double S, int M, double dt);

/// Radius of the psi-of-hull inclusion: S K^2 M (M-1) (2M-1) / 3 dt^3.
double psi_hull_radius(double K, double S, int M, double dt);

struct BoundInputs {
    double K = 1.0;
    double L = 1.0;
    double S = 0.0;
    double T = 1.0;
    int d = 1;
    int M = 2;
    double dt = 0.1;
};

/// Every constant evaluated for one parameter set. Entries whose formula is
/// undefined for the inputs are empty and explained in `notes`.
struct BoundSheet {
    BoundInputs inputs;
    std::optional<double> reach_sets;
    std::optional<double> convex_path;
    std::optional<double> nonconvex_path;
    std::optional<double> controls_path_dt;
    std::optional<double> controls_path_dt2;
    std::optional<double> coco_radius;
    std::optional<double> psi_hull_radius;
    std::string notes;
};

BoundSheet make_bound_sheet(const BoundInputs& in);

} // namespace eulerdi

#endif // EULERDI_BOUNDS_HPP
