#include "doctest.h"

#include "eulerdi/inclusion_model.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace eulerdi;

namespace {

ControlFamily constant_family(std::vector<Vector> b, FamilyConstants c)
{
    const Index d = b.front().size();
    AffineFamily a{b, std::vector<Matrix>(b.size(), Matrix::Zero(d, d)), Vector::Zero(d)};
    return ControlFamily::affine("constant", a, c);
}

} // namespace

TEST_CASE("eval_family examples")
{
    const auto signs = make_benchmark("signs1d");
    const PointCloud s = eval_family(signs.family, Vector::Zero(1));
    REQUIRE(s.size() == 2);
    CHECK(s.point(0)(0) == -1.0);
    CHECK(s.point(1)(0) == 1.0);

    const ControlFamily c = constant_family({Eigen::Vector2d(1, 2), Eigen::Vector2d(-3, 0.5)}, {4, 0, 0});
    const PointCloud v = eval_family(c, Vector(Eigen::Vector2d(7, -9)));
    CHECK(v.point(0) == Eigen::Vector2d(1, 2));
    CHECK(v.point(1) == Eigen::Vector2d(-3, 0.5));

    // f_1(x) = (-x2, x1)/(1+|x|) at (1,0): (0, 1/2); f_2 = -f_1.
    const auto rot = make_benchmark("rotation2d");
    const PointCloud r = eval_family(rot.family, Vector(Eigen::Vector2d(1, 0)));
    CHECK((r.point(0) - Eigen::Vector2d(0, 0.5)).norm() <= 1e-15);
    CHECK((r.point(1) - Eigen::Vector2d(0, -0.5)).norm() <= 1e-15);

    CHECK_THROWS_AS(eval_family(rot.family, Vector::Zero(3)), Error);
}

TEST_CASE("eval_family names the member producing a non-finite value")
{
    std::vector<ControlMember> members{
        {[](const Vector& x) -> Vector { return x; }, [](const Vector& x) -> Matrix { return Matrix::Identity(x.size(), x.size()); }},
        {[](const Vector& x) -> Vector { return x / 0.0; }, [](const Vector& x) -> Matrix { return Matrix::Zero(x.size(), x.size()); }}};
    const ControlFamily fam("broken", 1, members, {1, 1, 0});
    try {
        eval_family(fam, Vector::Ones(1));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("member 1") != std::string::npos);
    }
}

TEST_CASE("eval_family size and order are stable")
{
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        const Vector x = Vector::Constant(p.family.dim(), 0.3);
        const PointCloud a = eval_family(p.family, x);
        const PointCloud b = eval_family(p.family, x);
        CHECK(a.size() == p.family.size());
        CHECK(a.points() == b.points());
        for (int i = 0; i < p.family.size(); ++i)
            CHECK(a.point(i) == p.family.value(i, x));
    }
}

TEST_CASE("batched member evaluation agrees with pointwise evaluation")
{
    std::mt19937_64 rng(3);
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        const PointCloud pts = test::random_cloud(rng, static_cast<int>(p.family.dim()), 40);
        for (int i = 0; i < p.family.size(); ++i) {
            const Matrix batch = p.family.values(i, pts.points());
            for (Index j = 0; j < pts.size(); ++j)
                CHECK((batch.col(j) - p.family.value(i, Vector(pts.point(j)))).norm() <= 1e-15);
        }
    }
}

TEST_CASE("member indices are range checked")
{
    const auto p = make_benchmark("signs1d");
    CHECK_THROWS_AS(p.family.value(2, Vector::Zero(1)), Error);
    CHECK_THROWS_AS(p.family.value(-1, Vector::Zero(1)), Error);
    CHECK_THROWS_AS(p.family.jacobian(2, Vector::Zero(1)), Error);
}

TEST_CASE("validate_constants examples")
{
    const Box box = Box::centered_cube(2, 3.0);
    const ControlFamily c = constant_family({Eigen::Vector2d(1, 0), Eigen::Vector2d(0, -1)}, {1, 0, 0});
    const ConstantsReport r = validate_constants(c, box, 200);
    CHECK(r.ok());
    CHECK(r.max_jacobian == 0.0);
    CHECK(r.max_taylor_ratio == 0.0);
    CHECK(r.max_velocity == doctest::Approx(1.0));

    // Affine with |A| <= L: Taylor defect exactly zero.
    AffineFamily a{{Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(-0.3, 0.0)},
                   {Matrix(Eigen::Matrix2d{{0.5, -0.25}, {0.125, 0.375}}), Matrix(Eigen::Matrix2d{{0, 1}, {-1, 0}})},
                   Eigen::Vector2d(0.5, -0.5)};
    const ControlFamily af = ControlFamily::affine("aff", a, {10, 1.0, 0});
    const ConstantsReport ra = validate_constants(af, box, 200);
    CHECK(ra.max_taylor_ratio == 0.0);
    CHECK(ra.max_jacobian <= 1.0 + 1e-9);
    CHECK(ra.ok());

    // K set to half the true max |b_i|.
    const ControlFamily wrong = constant_family({Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 1)}, {1, 0, 0});
    const ConstantsReport rw = validate_constants(wrong, box, 50);
    CHECK_FALSE(rw.ok());
    CHECK(rw.max_velocity == doctest::Approx(2.0));
}

TEST_CASE("validate_constants flags understated L and S")
{
    const auto rot = make_benchmark("rotation2d");
    const Box box = Box::centered_cube(2, 2.0);
    FamilyConstants low = rot.family.constants();
    low.L = 0.5;
    std::vector<ControlMember> members;
    for (int i = 0; i < 2; ++i)
        members.push_back({[&rot, i](const Vector& x) { return rot.family.value(i, x); },
                           [&rot, i](const Vector& x) { return rot.family.jacobian(i, x); }});
    CHECK_FALSE(validate_constants(ControlFamily("lowL", 2, members, low), box, 400).ok());

    FamilyConstants lowS = rot.family.constants();
    lowS.S = 0.01;
    CHECK_FALSE(validate_constants(ControlFamily("lowS", 2, members, lowS), box, 400).ok());
}

TEST_CASE("every registered benchmark passes its own audit")
{
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        const ConstantsReport r = validate_constants(p.family, p.box, 1000);
        INFO(name);
        CHECK(r.ok());
        CHECK(r.max_hausdorff_ratio <= p.family.constants().L + 1e-9);
        if (p.family.affine_payload())
            CHECK(r.max_taylor_ratio == 0.0);
    }
}

TEST_CASE("validate_constants is deterministic")
{
    const auto p = make_benchmark("rotation2d");
    const ConstantsReport a = validate_constants(p.family, p.box, 300);
    const ConstantsReport b = validate_constants(p.family, p.box, 300);
    CHECK(a.max_velocity == b.max_velocity);
    CHECK(a.max_jacobian == b.max_jacobian);
    CHECK(a.max_taylor_ratio == b.max_taylor_ratio);
    CHECK(a.max_hausdorff_ratio == b.max_hausdorff_ratio);
}

TEST_CASE("operator_norm matches the largest singular value")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + trial % 4;
        const Matrix J = test::random_cloud(rng, d, d).points();
        const double s = Eigen::JacobiSVD<Matrix>(J).singularValues()(0);
        CHECK(operator_norm(J) == doctest::Approx(s).epsilon(1e-6));
    }
    CHECK(operator_norm(Matrix::Zero(2, 2)) == 0.0);
}

TEST_CASE("load_problem from a benchmark name")
{
    const ProblemSpec p = load_problem(R"({"benchmark": "signs1d"})");
    CHECK(p.family.dim() == 1);
    CHECK(p.family.size() == 2);
    CHECK(p.family.constants().K == 1.0);
    CHECK(p.family.constants().L == 0.0);
    CHECK(p.family.constants().S == 0.0);

    const ProblemSpec q = load_problem(R"({"benchmark": "rotation2d", "T": 0.5, "x0": [0, 2]})");
    CHECK(q.T == 0.5);
    CHECK(q.x0 == Eigen::Vector2d(0, 2));
}

TEST_CASE("load_problem round-trips an affine config")
{
    const ProblemSpec p = load_problem(R"({
        "dim": 2, "M": 2,
        "b": [[1, 0], [0, -1]],
        "A": [[[0, 1], [2, 3]], [[0.5, 0], [0, 0.5]]],
        "x0": [0.25, 0.5], "T": 2, "K": 20, "L": 4, "S": 0
    })");
    REQUIRE(p.family.affine_payload());
    const AffineFamily& a = *p.family.affine_payload();
    CHECK(a.b[0] == Eigen::Vector2d(1, 0));
    CHECK(a.b[1] == Eigen::Vector2d(0, -1));
    // Row-major: the second row of A_1 is (2, 3).
    CHECK(a.A[0](1, 0) == 2.0);
    CHECK(a.A[0](0, 1) == 1.0);
    CHECK(a.A[1] == Matrix(0.5 * Matrix::Identity(2, 2)));
    CHECK(a.anchor == Eigen::Vector2d(0.25, 0.5));
    CHECK(p.T == 2.0);
    CHECK(p.family.constants().K == 20.0);
    CHECK(p.family.value(0, Vector(Eigen::Vector2d(1.25, 0.5))) == Eigen::Vector2d(1, 2));
}

TEST_CASE("load_problem errors")
{
    try {
        load_problem(R"({"benchmark": "foo"})");
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("foo") != std::string::npos);
        for (const auto& name : benchmark_names())
            CHECK(msg.find(name) != std::string::npos);
    }
    CHECK_THROWS_AS(load_problem("{not json"), Error);
    CHECK_THROWS_AS(load_problem(R"({"dim": 2, "M": 1, "b": [[1, 0]], "A": [[[1, 0]]], "x0": [0, 0],
                                    "T": 1, "K": 1, "L": 1, "S": 0})"),
                    Error);
    CHECK_THROWS_AS(load_problem(R"({"dim": 1, "M": 0, "b": [], "A": [], "x0": [0], "T": 1, "K": 1, "L": 1,
                                    "S": 0})"),
                    Error);
    CHECK_THROWS_AS(load_problem(R"({"dim": 0, "M": 1, "b": [[]], "A": [[]], "x0": [], "T": 1, "K": 1,
                                    "L": 1, "S": 0})"),
                    Error);
    CHECK_THROWS_AS(load_problem(R"({"dim": 1, "M": 1, "b": [[1]], "A": [[[0]]], "x0": [0], "T": 0, "K": 1,
                                    "L": 0, "S": 0})"),
                    Error);
    CHECK_THROWS_AS(load_problem(R"({"dim": 1, "M": 2, "b": [[1]], "A": [[[0]]], "x0": [0], "T": 1, "K": 1,
                                    "L": 0, "S": 0})"),
                    Error);
}

TEST_CASE("problem boxes hold every solution")
{
    for (const auto& name : benchmark_names()) {
        const auto p = make_benchmark(name);
        CHECK(p.box.contains_ball(p.x0.norm() + p.family.constants().K * p.T));
    }
    const auto s = make_benchmark("signs1d");
    CHECK_THROWS_AS(make_problem(s.family, s.x0, 1.0, Box::centered_cube(1, 0.5)), Error);
    CHECK_THROWS_AS(make_problem(s.family, s.x0, -1.0), Error);
}
