#include "eulerdi/bounds.hpp"

#include "eulerdi/types.hpp"

#include <cmath>
#include <sstream>

namespace eulerdi {

namespace {

void require(bool ok, const char* what)
{
    if (!ok)
        throw Error(what);
}

void check_common(double K, double L, double T, double dt)
{
    require(std::isfinite(K) && K > 0.0, "bounds: K must be positive");
    require(std::isfinite(L) && L >= 0.0, "bounds: L must be nonnegative");
    require(std::isfinite(T) && T > 0.0, "bounds: T must be positive");
    require(std::isfinite(dt) && dt > 0.0, "bounds: dt must be positive");
}

// (M-1)^3 - (M-1)
double cubic_count(int M)
{
    const double m = M - 1;
    return m * m * m - m;
}

// M (M-1) (2M-1)
double square_sum_count(int M)
{
    const double m = M;
    return m * (m - 1.0) * (2.0 * m - 1.0);
}

} // namespace

double bound_reach_sets(double K, double L, double T, int d, double dt)
{
    check_common(K, L, T, dt);
    require(d >= 1, "bounds: d must be at least 1");
    return (K * std::exp(L * T) * (K * d * (d + 1) + L * T) + 2.0 * K * d) * dt;
}

double bound_convex_path(double K, double L, double T, double dt)
{
    check_common(K, L, T, dt);
    return K * L * T * std::exp(L * T) * dt;
}

double bound_nonconvex_path(double K, double L, double T, int d, double dt)
{
    check_common(K, L, T, dt);
    require(d >= 1, "bounds: d must be at least 1");
    const double e = std::exp(L * T);
    return K * (e * d * (d + 1) + 2.0 * d + L * T * e) * dt;
}

ControlsPathBound bound_controls_path(double K, double L, double S, double T, int M, double dt)
{
    check_common(K, L, T, dt);
    require(std::isfinite(S) && S >= 0.0, "bounds: S must be nonnegative");
    require(M >= 2, "bounds: the controls bound needs M >= 2");
    require(L > 0.0, "bounds: the controls bound divides by L; L must be positive");
    const double e = std::exp(L * T);
    const double first = e * (K * L * T + K * (8.0 * M - 10.0)) + 2.0 * K * (M - 1);
    const double second = e * (K * L * (M - 1) * (M - 2) +
                                2.0 * K * L * cubic_count(M) / 3.0 * std::pow(1.0 + L * dt, M - 3) +
                                2.0 * S * K * K * square_sum_count(M) / (3.0 * L));
    return {first * dt, second * dt * dt};
}

double coco_radius(double K, double L, double S, int M, double dt)
{
    require(std::isfinite(K) && K > 0.0, "bounds: K must be positive");
    require(std::isfinite(L) && L >= 0.0, "bounds: L must be nonnegative");
    require(std::isfinite(S) && S >= 0.0, "bounds: S must be nonnegative");
    require(std::isfinite(dt) && dt >= 0.0, "bounds: dt must be nonnegative");
    require(M >= 2, "bounds: coco_radius needs M >= 2");
    const double cubic = 2.0 * K * L * L * cubic_count(M) / 3.0 * std::pow(1.0 + L * dt, M - 3) +
                         S * K * K * square_sum_count(M) / 3.0;
    return (8.0 * M - 10.0) * K * L * dt * dt + cubic * dt * dt * dt;
}

double psi_hull_radius(double K, double S, int M, double dt)
{
    require(std::isfinite(K) && K > 0.0, "bounds: K must be positive");
    require(std::isfinite(S) && S >= 0.0, "bounds: S must be nonnegative");
    require(std::isfinite(dt) && dt >= 0.0, "bounds: dt must be nonnegative");
    require(M >= 1, "bounds: M must be at least 1");
    return S * K * K * square_sum_count(M) / 3.0 * dt * dt * dt;
}

BoundSheet make_bound_sheet(const BoundInputs& in)
{
    BoundSheet sheet;
    sheet.inputs = in;
    std::ostringstream notes;
    auto attempt = [&](std::optional<double>& slot, const char* name, auto&& fn) {
        try {
            slot = fn();
        } catch (const Error& e) {
            notes << name << ": " << e.what() << "; ";
        }
    };
    attempt(sheet.reach_sets, "reach_sets", [&] { return bound_reach_sets(in.K, in.L, in.T, in.d, in.dt); });
    attempt(sheet.convex_path, "convex_path", [&] { return bound_convex_path(in.K, in.L, in.T, in.dt); });
    attempt(sheet.nonconvex_path, "nonconvex_path",
            [&] { return bound_nonconvex_path(in.K, in.L, in.T, in.d, in.dt); });
    try {
        const auto c = bound_controls_path(in.K, in.L, in.S, in.T, in.M, in.dt);
        sheet.controls_path_dt = c.dt_group;
        sheet.controls_path_dt2 = c.dt2_group;
    } catch (const Error& e) {
        notes << "controls_path: " << e.what() << "; ";
    }
    attempt(sheet.coco_radius, "coco_radius", [&] { return coco_radius(in.K, in.L, in.S, in.M, in.dt); });
    attempt(sheet.psi_hull_radius, "psi_hull_radius", [&] { return psi_hull_radius(in.K, in.S, in.M, in.dt); });
    sheet.notes = notes.str();
    return sheet;
}

} // namespace eulerdi
