#ifndef EULERDI_INCLUSION_MODEL_HPP
#define EULERDI_INCLUSION_MODEL_HPP

#include "eulerdi/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eulerdi {

/// Certified constants of a right-hand side: |f_i| <= K, |f_i'| <= L and
/// Taylor defect <= S |x - z|^2.
struct FamilyConstants {
    double K = 0.0;
    double L = 0.0;
    double S = 0.0;
};

/// f_i(x) = b_i + A_i (x - anchor).
struct AffineFamily {
    std::vector<Vector> b;
    std::vector<Matrix> A;
    Vector anchor;
};

/// One smooth member f_i of the finite set-valued map, with its Jacobian.
/// `batch`, when set, evaluates f_i on every column of a matrix at once.
struct ControlMember {
    std::function<Vector(const Vector&)> value;
    std::function<Matrix(const Vector&)> jacobian;
    std::function<Matrix(const Matrix&)> batch = {};
};

/// F(x) = {f_1(x), ..., f_M(x)}. Immutable after construction; member
/// indices are zero-based throughout the library.
class ControlFamily {
public:
    ControlFamily(std::string label, Index dim, std::vector<ControlMember> members, FamilyConstants constants);

    static ControlFamily affine(std::string label, AffineFamily payload, FamilyConstants constants);

    const std::string& label() const { return label_; }
    Index dim() const { return dim_; }
    int size() const { return static_cast<int>(members_.size()); }
    const FamilyConstants& constants() const { return constants_; }
    const std::optional<AffineFamily>& affine_payload() const { return affine_; }

    Vector value(int i, const Vector& x) const;
    Matrix jacobian(int i, const Vector& x) const;
    /// f_i applied to each column of `points`.
    Matrix values(int i, const Matrix& points) const;

private:
    std::string label_;
    Index dim_;
    std::vector<ControlMember> members_;
    FamilyConstants constants_;
    std::optional<AffineFamily> affine_;
};

/// Axis-aligned box used for auditing constants.
struct Box {
    Vector lower;
    Vector upper;

    static Box centered_cube(Index dim, double radius);
    bool contains_ball(double radius) const;
};

struct ProblemSpec {
    ControlFamily family;
    Vector x0;
    double T;
    Box box;
};

/// Builds a problem and checks T > 0 and that the box holds every solution.
ProblemSpec make_problem(ControlFamily family, Vector x0, double T, std::optional<Box> box = std::nullopt);

/// {f_1(x), ..., f_M(x)} in member order.
PointCloud eval_family(const ControlFamily& fam, const Vector& x);

struct ConstantsReport {
    std::size_t point_samples = 0;
    std::size_t pair_samples = 0;
    double max_velocity = 0.0;          // max |f_i(x)|
    double max_jacobian = 0.0;          // max operator norm |f_i'(x)|
    double max_taylor_ratio = 0.0;      // max |f(x) - f(z) - f'(z)(x - z)| / |x - z|^2
    double max_hausdorff_ratio = 0.0;   // max H(F(x), F(y)) / |x - y|
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Audits K, L and S of a family on a deterministic Halton sample of the box.
ConstantsReport validate_constants(const ControlFamily& fam, const Box& box, std::size_t samples);

/// Largest singular value by power iteration on J^T J.
double operator_norm(const Matrix& J, int iterations = 50);

/// Names of the built-in benchmark problems.
std::vector<std::string> benchmark_names();

ProblemSpec make_benchmark(std::string_view name);

/// Parses a JSON problem document. Either `benchmark` names a registered
/// problem (x0 and T may override its defaults) or the affine payload is
/// given in full.
ProblemSpec load_problem(std::string_view config_text);

/// Benchmark name or path to a JSON problem file.
ProblemSpec resolve_problem(const std::string& name_or_path);

} // namespace eulerdi

#endif // EULERDI_INCLUSION_MODEL_HPP
