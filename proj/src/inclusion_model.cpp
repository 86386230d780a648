#include "eulerdi/inclusion_model.hpp"

#include "eulerdi/geometry.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace eulerdi {

namespace {

constexpr double kSlack = 1e-9;

void check_constants(const FamilyConstants& c)
{
    if (!(c.K > 0.0) || !std::isfinite(c.K))
        throw Error("velocity bound K must be positive");
    if (!(c.L >= 0.0) || !std::isfinite(c.L))
        throw Error("Lipschitz bound L must be nonnegative");
    if (!(c.S >= 0.0) || !std::isfinite(c.S))
        throw Error("smoothness constant S must be nonnegative");
}

double radical_inverse(std::size_t index, unsigned base)
{
    double result = 0.0;
    double f = 1.0 / base;
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= base;
    }
    return result;
}

constexpr std::array<unsigned, 12> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

/// Halton point of the given dimension, mapped into the box (offset selects
/// which prime bases are used so point and pair samples stay decorrelated).
Vector halton_point(std::size_t index, const Box& box, std::size_t base_offset)
{
    const Index d = box.lower.size();
    Vector p(d);
    for (Index k = 0; k < d; ++k) {
        const auto b = kPrimes[(base_offset + static_cast<std::size_t>(k)) % kPrimes.size()];
        p(k) = box.lower(k) + radical_inverse(index + 1, b) * (box.upper(k) - box.lower(k));
    }
    return p;
}

} // namespace

ControlFamily::ControlFamily(std::string label, Index dim, std::vector<ControlMember> members,
                             FamilyConstants constants)
    : label_(std::move(label)), dim_(dim), members_(std::move(members)), constants_(constants)
{
    if (dim_ < 1)
        throw Error("family dimension d must be at least 1");
    if (members_.empty())
        throw Error("family must have at least one member (M >= 1)");
    for (const auto& m : members_) {
        if (!m.value || !m.jacobian)
            throw Error("family member is missing its value or Jacobian");
    }
    check_constants(constants_);
}

ControlFamily ControlFamily::affine(std::string label, AffineFamily payload, FamilyConstants constants)
{
    const Index d = payload.anchor.size();
    if (d < 1)
        throw Error("affine family: anchor must have dimension >= 1");
    if (payload.b.empty())
        throw Error("affine family: M must be at least 1");
    if (payload.A.size() != payload.b.size())
        throw Error("affine family: number of matrices differs from number of vectors");
    for (std::size_t i = 0; i < payload.b.size(); ++i) {
        if (payload.b[i].size() != d)
            throw Error("affine family: b[" + std::to_string(i) + "] has wrong dimension");
        if (payload.A[i].rows() != d || payload.A[i].cols() != d)
            throw Error("affine family: A[" + std::to_string(i) + "] is not d x d");
        if (!payload.b[i].allFinite() || !payload.A[i].allFinite())
            throw Error("affine family: non-finite entry in member " + std::to_string(i));
    }
    std::vector<ControlMember> members;
    for (std::size_t i = 0; i < payload.b.size(); ++i) {
        const Vector b = payload.b[i];
        const Matrix A = payload.A[i];
        const Vector anchor = payload.anchor;
        members.push_back({[b, A, anchor](const Vector& x) -> Vector { return b + A * (x - anchor); },
                           [A](const Vector&) -> Matrix { return A; },
                           [b, A, anchor](const Matrix& X) -> Matrix {
                               return (A * (X.colwise() - anchor)).colwise() + b;
                           }});
    }
    ControlFamily fam(std::move(label), d, std::move(members), constants);
    fam.affine_ = std::move(payload);
    return fam;
}

Vector ControlFamily::value(int i, const Vector& x) const
{
    if (i < 0 || i >= size())
        throw Error("member index " + std::to_string(i) + " out of range [0, " + std::to_string(size()) + ")");
    return members_[static_cast<std::size_t>(i)].value(x);
}

Matrix ControlFamily::values(int i, const Matrix& points) const
{
    if (i < 0 || i >= size())
        throw Error("member index " + std::to_string(i) + " out of range [0, " + std::to_string(size()) + ")");
    const auto& m = members_[static_cast<std::size_t>(i)];
    if (m.batch)
        return m.batch(points);
    Matrix out(points.rows(), points.cols());
    for (Index j = 0; j < points.cols(); ++j)
        out.col(j) = m.value(points.col(j));
    return out;
}

Matrix ControlFamily::jacobian(int i, const Vector& x) const
{
    if (i < 0 || i >= size())
        throw Error("member index " + std::to_string(i) + " out of range [0, " + std::to_string(size()) + ")");
    return members_[static_cast<std::size_t>(i)].jacobian(x);
}

Box Box::centered_cube(Index dim, double radius)
{
    return {Vector::Constant(dim, -radius), Vector::Constant(dim, radius)};
}

bool Box::contains_ball(double radius) const
{
    return (lower.array() <= -radius).all() && (upper.array() >= radius).all();
}

ProblemSpec make_problem(ControlFamily family, Vector x0, double T, std::optional<Box> box)
{
    if (!(T > 0.0) || !std::isfinite(T))
        throw Error("horizon T must be positive");
    if (x0.size() != family.dim())
        throw Error("x0 dimension does not match the family");
    if (!x0.allFinite())
        throw Error("x0 must be finite");
    const double radius = x0.norm() + family.constants().K * T;
    Box b = box.value_or(Box::centered_cube(family.dim(), radius));
    if (b.lower.size() != family.dim() || b.upper.size() != family.dim())
        throw Error("validation box dimension does not match the family");
    if (!b.contains_ball(radius))
        throw Error("validation box must contain the ball of radius |x0| + K T");
    return {std::move(family), std::move(x0), T, std::move(b)};
}

PointCloud eval_family(const ControlFamily& fam, const Vector& x)
{
    if (x.size() != fam.dim())
        throw Error("eval_family: state dimension does not match the family");
    Matrix values(fam.dim(), fam.size());
    for (int i = 0; i < fam.size(); ++i) {
        Vector v = fam.value(i, x);
        if (v.size() != fam.dim() || !v.allFinite())
            throw Error("eval_family: member " + std::to_string(i) + " returned a non-finite value");
        values.col(i) = v;
    }
    return PointCloud(std::move(values));
}

double operator_norm(const Matrix& J, int iterations)
{
    if (J.size() == 0 || J.isZero(0.0))
        return 0.0;
    const Matrix G = J.transpose() * J;
    Vector v = Vector::Ones(G.cols()).normalized();
    for (int k = 0; k < iterations; ++k) {
        Vector w = G * v;
        const double n = w.norm();
        if (n == 0.0)
            return 0.0;
        v = w / n;
    }
    return std::sqrt(v.dot(G * v));
}

ConstantsReport validate_constants(const ControlFamily& fam, const Box& box, std::size_t samples)
{
    if (samples < 2)
        throw Error("validate_constants: need at least 2 samples");
    if (box.lower.size() != fam.dim())
        throw Error("validate_constants: box dimension mismatch");
    const auto& c = fam.constants();
    // Affine members have zero Taylor defect by construction.
    const bool exact_affine = fam.affine_payload().has_value();
    ConstantsReport report;

    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = halton_point(s, box, 0);
        for (int i = 0; i < fam.size(); ++i) {
            report.max_velocity = std::max(report.max_velocity, fam.value(i, x).norm());
            report.max_jacobian = std::max(report.max_jacobian, operator_norm(fam.jacobian(i, x)));
        }
        ++report.point_samples;
    }

    const Index d = fam.dim();
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = halton_point(s, box, static_cast<std::size_t>(d));
        const Vector z = halton_point(s, box, static_cast<std::size_t>(2 * d));
        const double gap = (x - z).norm();
        if (gap < 1e-3)
            continue;
        ++report.pair_samples;
        for (int i = 0; i < fam.size() && !exact_affine; ++i) {
            const Vector defect = fam.value(i, x) - fam.value(i, z) - fam.jacobian(i, z) * (x - z);
            report.max_taylor_ratio = std::max(report.max_taylor_ratio, defect.norm() / (gap * gap));
        }
        const double h = hausdorff_finite(eval_family(fam, x), eval_family(fam, z));
        report.max_hausdorff_ratio = std::max(report.max_hausdorff_ratio, h / gap);
    }

    auto flag = [&](double observed, double declared, const char* what) {
        if (observed > declared + kSlack) {
            std::ostringstream os;
            os << what << ": observed " << observed << " exceeds declared " << declared;
            report.violations.push_back(os.str());
        }
    };
    flag(report.max_velocity, c.K, "velocity bound K");
    flag(report.max_jacobian, c.L, "Jacobian bound L");
    flag(report.max_taylor_ratio, c.S, "smoothness constant S");
    flag(report.max_hausdorff_ratio, c.L, "set-valued Lipschitz bound L");
    return report;
}

namespace {

Matrix rotation_generator()
{
    Matrix J(2, 2);
    J << 0.0, -1.0, 1.0, 0.0;
    return J;
}

// f(x) = sign * J x / (1 + |x|)
ControlMember rotation_member(double sign)
{
    const Matrix J = rotation_generator();
    return {[J, sign](const Vector& x) -> Vector { return sign * (J * x) / (1.0 + x.norm()); },
            [J, sign](const Vector& x) -> Matrix {
                const double r = x.norm();
                if (r == 0.0)
                    return sign * J;
                return sign * (J / (1.0 + r) - (J * x) * x.transpose() / (r * (1.0 + r) * (1.0 + r)));
            },
            [J, sign](const Matrix& X) -> Matrix {
                const Eigen::RowVectorXd scale = sign / (1.0 + X.colwise().norm().array());
                return (J * X).array().rowwise() * scale.array();
            }};
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index k = 0;
    for (double e : v)
        out(k++) = e;
    return out;
}

Matrix mat2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

using Factory = ProblemSpec (*)();

const std::map<std::string, Factory, std::less<>>& registry()
{
    static const std::map<std::string, Factory, std::less<>> reg = {
        {"signs1d",
         [] {
             AffineFamily p{{vec({-1.0}), vec({1.0})}, {Matrix::Zero(1, 1), Matrix::Zero(1, 1)}, vec({0.0})};
             return make_problem(ControlFamily::affine("signs1d", std::move(p), {1.0, 0.0, 0.0}), vec({0.0}), 1.0);
         }},
        {"rotation2d",
         [] {
             ControlFamily fam("rotation2d", 2, {rotation_member(1.0), rotation_member(-1.0)}, {1.0, 1.0, 1.0});
             return make_problem(std::move(fam), vec({1.0, 0.0}), 1.0);
         }},
        {"rotation1",
         [] {
             ControlFamily fam("rotation1", 2, {rotation_member(1.0)}, {1.0, 1.0, 1.0});
             return make_problem(std::move(fam), vec({1.0, 0.0}), 1.0);
         }},
        {"affine2d",
         [] {
             // Three unit velocities perturbed by linear terms with |A_i| = 0.2. On the
             // validation cube of half-width 1.4 every |x| <= 1.4 sqrt(2), so |f_i| <= 1.396 < K.
             const double s = std::sqrt(3.0) / 2.0;
             AffineFamily p{{vec({1.0, 0.0}), vec({-0.5, s}), vec({-0.5, -s})},
                            {mat2(0.0, -0.2, 0.2, 0.0), mat2(0.2, 0.0, 0.0, 0.0), mat2(0.0, 0.0, 0.0, -0.2)},
                            vec({0.0, 0.0})};
             return make_problem(ControlFamily::affine("affine2d", std::move(p), {1.4, 0.2, 0.0}),
                                 vec({0.0, 0.0}), 1.0);
         }},
        {"const2d",
         [] {
             AffineFamily p{{vec({1.0, 0.0}), vec({0.0, 1.0})}, {Matrix::Zero(2, 2), Matrix::Zero(2, 2)},
                            vec({0.0, 0.0})};
             return make_problem(ControlFamily::affine("const2d", std::move(p), {1.0, 0.0, 0.0}),
                                 vec({0.0, 0.0}), 1.0);
         }},
    };
    return reg;
}

Vector json_vector(const nlohmann::json& j, const char* what)
{
    if (!j.is_array() || j.empty())
        throw Error(std::string("problem config: '") + what + "' must be a non-empty array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        if (!j[k].is_number())
            throw Error(std::string("problem config: '") + what + "' has a non-numeric entry");
        v(static_cast<Index>(k)) = j[k].get<double>();
    }
    return v;
}

Matrix json_matrix(const nlohmann::json& j, Index dim, const std::string& what)
{
    if (!j.is_array() || static_cast<Index>(j.size()) != dim)
        throw Error("problem config: matrix " + what + " must have " + std::to_string(dim) + " rows");
    Matrix m(dim, dim);
    for (Index r = 0; r < dim; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Index>(row.size()) != dim)
            throw Error("problem config: matrix " + what + " row " + std::to_string(r) + " must have " +
                        std::to_string(dim) + " entries");
        for (Index c = 0; c < dim; ++c) {
            if (!row[static_cast<std::size_t>(c)].is_number())
                throw Error("problem config: matrix " + what + " has a non-numeric entry");
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

std::string available_list()
{
    std::string out;
    for (const auto& name : benchmark_names())
        out += (out.empty() ? "" : ", ") + name;
    return out;
}

} // namespace

std::vector<std::string> benchmark_names()
{
    std::vector<std::string> names;
    for (const auto& [name, _] : registry())
        names.push_back(name);
    return names;
}

ProblemSpec make_benchmark(std::string_view name)
{
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end())
        throw Error("unknown benchmark '" + std::string(name) + "'; available: " + available_list());
    return it->second();
}

ProblemSpec load_problem(std::string_view config_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("problem config does not parse: ") + e.what());
    }
    if (!j.is_object())
        throw Error("problem config must be a JSON object");

    if (j.contains("benchmark")) {
        ProblemSpec base = make_benchmark(j.at("benchmark").get<std::string>());
        Vector x0 = j.contains("x0") ? json_vector(j.at("x0"), "x0") : base.x0;
        const double T = j.contains("T") ? j.at("T").get<double>() : base.T;
        return make_problem(std::move(base.family), std::move(x0), T);
    }

    for (const char* key : {"dim", "M", "b", "A", "x0", "T", "K", "L", "S"}) {
        if (!j.contains(key))
            throw Error(std::string("problem config: missing field '") + key + "'");
    }
    const long dim = j.at("dim").get<long>();
    const long M = j.at("M").get<long>();
    if (dim < 1)
        throw Error("problem config: dim must be at least 1");
    if (M < 1)
        throw Error("problem config: M must be at least 1");
    const auto& jb = j.at("b");
    const auto& jA = j.at("A");
    if (!jb.is_array() || static_cast<long>(jb.size()) != M)
        throw Error("problem config: 'b' must list M vectors");
    if (!jA.is_array() || static_cast<long>(jA.size()) != M)
        throw Error("problem config: 'A' must list M matrices");

    AffineFamily payload;
    for (long i = 0; i < M; ++i) {
        Vector b = json_vector(jb[static_cast<std::size_t>(i)], "b");
        if (b.size() != dim)
            throw Error("problem config: b[" + std::to_string(i) + "] must have dim entries");
        payload.b.push_back(std::move(b));
        payload.A.push_back(json_matrix(jA[static_cast<std::size_t>(i)], dim, "A[" + std::to_string(i) + "]"));
    }
    Vector x0 = json_vector(j.at("x0"), "x0");
    payload.anchor = j.contains("anchor") ? json_vector(j.at("anchor"), "anchor") : x0;
    const FamilyConstants c{j.at("K").get<double>(), j.at("L").get<double>(), j.at("S").get<double>()};
    const std::string label = j.value("label", std::string("affine"));
    return make_problem(ControlFamily::affine(label, std::move(payload), c), std::move(x0), j.at("T").get<double>());
}

ProblemSpec resolve_problem(const std::string& name_or_path)
{
    if (std::filesystem::is_regular_file(name_or_path)) {
        std::ifstream in(name_or_path);
        std::stringstream buf;
        buf << in.rdbuf();
        return load_problem(buf.str());
    }
    return make_benchmark(name_or_path);
}

} // namespace eulerdi
