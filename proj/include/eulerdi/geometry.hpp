#ifndef EULERDI_GEOMETRY_HPP
#define EULERDI_GEOMETRY_HPP

#include "eulerdi/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace eulerdi {

inline constexpr double kDedupTolerance = 1e-12;
inline constexpr double kHullTolerance = 1e-9;

/// Thrown when the minimum-norm-point iteration hits its cap; carries the
/// best distance found so far.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best) : Error(what), best_value(best) {}
    double best_value;
};

namespace detail {

inline constexpr Index kMaxGridDim = 8;

struct CellKey {
    std::array<std::int64_t, kMaxGridDim> cell{};
    bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const noexcept
    {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto c : k.cell) {
            std::uint64_t z = static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + h;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            h = z ^ (z >> 31);
        }
        return static_cast<std::size_t>(h);
    }
};

template <typename Derived>
CellKey cell_of(const Eigen::MatrixBase<Derived>& p, double cell)
{
    if (p.size() > kMaxGridDim)
        throw Error("grid operations support dimensions up to " + std::to_string(kMaxGridDim));
    CellKey key;
    for (Index k = 0; k < p.size(); ++k) {
        const double q = std::floor(static_cast<double>(p(k)) / cell);
        if (!(std::abs(q) < 9.0e18))
            throw Error("grid cell index overflow; increase the cell size");
        key.cell[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(q);
    }
    return key;
}

/// Incremental set of points with tolerance-based duplicate rejection. Two
/// points are duplicates when every coordinate differs by at most `tol`.
template <typename Scalar>
class DedupSet {
public:
    DedupSet(Index dim, double tol) : dim_(dim), tol_(tol)
    {
        if (!(tol > 0.0))
            throw Error("deduplication tolerance must be positive");
    }

    /// Returns true when `p` was new and got stored.
    template <typename Derived>
    bool insert(const Eigen::MatrixBase<Derived>& p)
    {
        CellKey key = cell_of(p, tol_);
        if (has_neighbor(p, key, 0))
            return false;
        const auto idx = static_cast<Index>(coords_.size()) / dim_;
        for (Index k = 0; k < dim_; ++k)
            coords_.push_back(p(k));
        buckets_[std::move(key)].push_back(idx);
        return true;
    }

    Index size() const { return static_cast<Index>(coords_.size()) / dim_; }
    PointCloudT<Scalar> cloud() const { return PointCloudT<Scalar>::from_flat(dim_, coords_); }

private:
    template <typename Derived>
    bool has_neighbor(const Eigen::MatrixBase<Derived>& p, CellKey& key, Index axis)
    {
        if (axis == dim_) {
            auto it = buckets_.find(key);
            if (it == buckets_.end())
                return false;
            for (Index idx : it->second) {
                bool close = true;
                for (Index k = 0; k < dim_ && close; ++k)
                    close = std::abs(static_cast<double>(coords_[static_cast<std::size_t>(idx * dim_ + k)] - p(k))) <= tol_;
                if (close)
                    return true;
            }
            return false;
        }
        auto& c = key.cell[static_cast<std::size_t>(axis)];
        for (int off : {0, -1, 1}) {
            c += off;
            const bool hit = has_neighbor(p, key, axis + 1);
            c -= off;
            if (hit)
                return true;
        }
        return false;
    }

    Index dim_;
    double tol_;
    std::vector<Scalar> coords_;
    std::unordered_map<CellKey, std::vector<Index>, CellKeyHash> buckets_;
};

template <typename Scalar>
void require_same_dim(const PointCloudT<Scalar>& a, const PointCloudT<Scalar>& b, const char* op)
{
    if (a.dim() != b.dim())
        throw Error(std::string(op) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()) + ")");
}

} // namespace detail

/// Removes points lying within `tol` (per coordinate) of an earlier point.
/// First occurrences are kept, in input order.
template <typename Scalar>
PointCloudT<Scalar> deduplicate(const PointCloudT<Scalar>& c, double tol = kDedupTolerance)
{
    detail::DedupSet<Scalar> set(c.dim(), tol);
    for (Index j = 0; j < c.size(); ++j)
        set.insert(c.point(j));
    return set.cloud();
}

/// {a + b : a in c1, b in c2}, enumerated with c1 as the outer loop.
template <typename Scalar>
PointCloudT<Scalar> minkowski_sum(const PointCloudT<Scalar>& c1, const PointCloudT<Scalar>& c2,
                                  std::optional<double> dedup_tol = kDedupTolerance)
{
    detail::require_same_dim(c1, c2, "minkowski_sum");
    MatrixX<Scalar> sums(c1.dim(), c1.size() * c2.size());
    for (Index i = 0; i < c1.size(); ++i)
        sums.middleCols(i * c2.size(), c2.size()) = c2.points().colwise() + c1.point(i);
    PointCloudT<Scalar> out(std::move(sums));
    return dedup_tol ? deduplicate(out, *dedup_tol) : out;
}

template <typename Scalar>
PointCloudT<Scalar> scale_cloud(Scalar lambda, const PointCloudT<Scalar>& c)
{
    if (!(lambda > Scalar(0)))
        throw Error("scale_cloud: scale factor must be positive");
    return PointCloudT<Scalar>(lambda * c.points());
}

template <typename Scalar>
PointCloudT<Scalar> translate_cloud(const PointCloudT<Scalar>& c, const VectorX<Scalar>& v)
{
    if (v.size() != c.dim())
        throw Error("translate_cloud: dimension mismatch");
    return PointCloudT<Scalar>(c.points().colwise() + v);
}

/// max over a of the distance to the nearest point of b. Exact: candidates
/// are swept along b's widest axis and pruned only when they provably cannot
/// change the result.
template <typename Scalar>
Scalar directed_hausdorff(const PointCloudT<Scalar>& a, const PointCloudT<Scalar>& b)
{
    detail::require_same_dim(a, b, "directed_hausdorff");
    const auto& B = b.points();
    Index axis = 0;
    {
        const VectorX<Scalar> spread = B.rowwise().maxCoeff() - B.rowwise().minCoeff();
        spread.maxCoeff(&axis);
    }
    std::vector<Index> order(static_cast<std::size_t>(b.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return B(axis, i) < B(axis, j); });
    std::vector<Scalar> keys(order.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        keys[k] = B(axis, order[k]);

    Scalar worst2(0);
    for (Index i = 0; i < a.size(); ++i) {
        const auto p = a.point(i);
        const Scalar pk = p(axis);
        const auto start = static_cast<std::ptrdiff_t>(
            std::lower_bound(keys.begin(), keys.end(), pk) - keys.begin());
        Scalar best2 = std::numeric_limits<Scalar>::infinity();
        std::ptrdiff_t lo = start - 1;
        std::ptrdiff_t hi = start;
        const auto n = static_cast<std::ptrdiff_t>(keys.size());
        bool lo_open = lo >= 0;
        bool hi_open = hi < n;
        while ((lo_open || hi_open) && best2 > worst2) {
            if (hi_open) {
                const Scalar gap = keys[static_cast<std::size_t>(hi)] - pk;
                if (gap * gap > best2) {
                    hi_open = false;
                } else {
                    best2 = std::min(best2, (B.col(order[static_cast<std::size_t>(hi)]) - p).squaredNorm());
                    hi_open = ++hi < n;
                }
            }
            if (lo_open && best2 > worst2) {
                const Scalar gap = pk - keys[static_cast<std::size_t>(lo)];
                if (gap * gap > best2) {
                    lo_open = false;
                } else {
                    best2 = std::min(best2, (B.col(order[static_cast<std::size_t>(lo)]) - p).squaredNorm());
                    lo_open = --lo >= 0;
                }
            }
        }
        worst2 = std::max(worst2, best2);
    }
    using std::sqrt;
    return sqrt(worst2);
}

/// Hausdorff distance between two finite sets.
template <typename Scalar>
Scalar hausdorff_finite(const PointCloudT<Scalar>& a, const PointCloudT<Scalar>& b)
{
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

template <typename Scalar>
struct HullProjection {
    Scalar distance;         // |p - nearest|; never below the true distance
    VectorX<Scalar> nearest; // point of co(support) realizing `distance`
    VectorX<Scalar> weights; // convex weights over the support columns
    int iterations;
};

inline int default_hull_iteration_cap(Index dim)
{
    return static_cast<int>(10 * (dim + 2) * (dim + 2));
}

/// Nearest point of co(support) to p by Wolfe's minimum-norm-point method.
/// The linear-minimization step picks the support vertex most aligned against
/// the current residual; stopping uses the duality gap so the returned
/// distance is within `tol` of the true one.
template <typename Scalar>
HullProjection<Scalar> project_onto_hull(const VectorX<Scalar>& p, const PointCloudT<Scalar>& support,
                                         Scalar tol = Scalar(kHullTolerance),
                                         std::optional<int> iteration_cap = std::nullopt)
{
    if (!(tol > Scalar(0)))
        throw Error("dist_point_to_hull: tolerance must be positive");
    if (p.size() != support.dim())
        throw Error("dist_point_to_hull: dimension mismatch");
    const int cap = iteration_cap.value_or(default_hull_iteration_cap(support.dim()));
    const MatrixX<Scalar> Q = support.points().colwise() - p;
    const Index n = Q.cols();
    const Scalar zero_weight = Scalar(1e-14);

    std::vector<Index> active;
    std::vector<Scalar> lambda;
    {
        Index j0 = 0;
        Q.colwise().squaredNorm().minCoeff(&j0);
        active.push_back(j0);
        lambda.push_back(Scalar(1));
    }
    auto combine = [&](const std::vector<Scalar>& w) {
        VectorX<Scalar> x = VectorX<Scalar>::Zero(Q.rows());
        for (std::size_t k = 0; k < active.size(); ++k)
            x += w[k] * Q.col(active[k]);
        return x;
    };
    auto finish = [&](const VectorX<Scalar>& x, int iters) {
        HullProjection<Scalar> out;
        out.distance = x.norm();
        out.nearest = x + p;
        out.weights = VectorX<Scalar>::Zero(n);
        for (std::size_t k = 0; k < active.size(); ++k)
            out.weights(active[k]) = lambda[k];
        out.iterations = iters;
        return out;
    };

    VectorX<Scalar> x = Q.col(active.front());
    for (int iter = 0;; ++iter) {
        const Scalar xnorm = x.norm();
        if (xnorm <= tol)
            return finish(x, iter);
        Index j = 0;
        const Scalar low = (Q.transpose() * x).minCoeff(&j);
        const Scalar gap = x.squaredNorm() - low;
        if (gap <= tol * xnorm)
            return finish(x, iter);
        if (std::find(active.begin(), active.end(), j) != active.end() || iter >= cap) {
            throw ConvergenceError("dist_point_to_hull: minimum-norm-point iteration did not converge",
                                   static_cast<double>(xnorm));
        }
        active.push_back(j);
        lambda.push_back(Scalar(0));

        for (;;) {
            // Minimum-norm point of the affine hull of the active columns.
            std::vector<Scalar> alpha(active.size());
            if (active.size() == 1) {
                alpha[0] = Scalar(1);
            } else {
                const auto m = static_cast<Index>(active.size()) - 1;
                MatrixX<Scalar> D(Q.rows(), m);
                for (Index k = 0; k < m; ++k)
                    D.col(k) = Q.col(active[static_cast<std::size_t>(k + 1)]) - Q.col(active[0]);
                const VectorX<Scalar> beta =
                    D.completeOrthogonalDecomposition().solve(-Q.col(active[0]).eval());
                alpha[0] = Scalar(1) - beta.sum();
                for (Index k = 0; k < m; ++k)
                    alpha[static_cast<std::size_t>(k + 1)] = beta(k);
            }
            if (std::all_of(alpha.begin(), alpha.end(), [&](Scalar a) { return a > zero_weight; })) {
                lambda = std::move(alpha);
                x = combine(lambda);
                break;
            }
            Scalar theta(1);
            for (std::size_t k = 0; k < alpha.size(); ++k) {
                if (alpha[k] <= zero_weight)
                    theta = std::min(theta, lambda[k] / (lambda[k] - alpha[k]));
            }
            for (std::size_t k = 0; k < alpha.size(); ++k)
                lambda[k] = (Scalar(1) - theta) * lambda[k] + theta * alpha[k];
            std::vector<Index> kept;
            std::vector<Scalar> kept_lambda;
            for (std::size_t k = 0; k < active.size(); ++k) {
                if (lambda[k] > zero_weight) {
                    kept.push_back(active[k]);
                    kept_lambda.push_back(lambda[k]);
                }
            }
            if (kept.empty()) {
                kept.push_back(active.back());
                kept_lambda.push_back(Scalar(1));
            }
            const Scalar total = std::accumulate(kept_lambda.begin(), kept_lambda.end(), Scalar(0));
            for (auto& w : kept_lambda)
                w /= total;
            active = std::move(kept);
            lambda = std::move(kept_lambda);
            x = combine(lambda);
        }
    }
}

template <typename Scalar>
Scalar dist_point_to_hull(const VectorX<Scalar>& p, const PointCloudT<Scalar>& support,
                          Scalar tol = Scalar(kHullTolerance))
{
    return project_onto_hull(p, support, tol).distance;
}

/// max over a of dist(., co b): every directed distance to a convex set is
/// attained at a generator, so scanning a's points is exact.
template <typename Scalar>
Scalar directed_hull_distance(const PointCloudT<Scalar>& a, const PointCloudT<Scalar>& b,
                              Scalar tol = Scalar(kHullTolerance))
{
    detail::require_same_dim(a, b, "hausdorff_hulls");
    Scalar worst(0);
    for (Index i = 0; i < a.size(); ++i)
        worst = std::max(worst, dist_point_to_hull(VectorX<Scalar>(a.point(i)), b, tol));
    return worst;
}

/// Hausdorff distance between co(a) and co(b), within `tol`.
template <typename Scalar>
Scalar hausdorff_hulls(const PointCloudT<Scalar>& a, const PointCloudT<Scalar>& b,
                       Scalar tol = Scalar(kHullTolerance))
{
    return std::max(directed_hull_distance(a, b, tol), directed_hull_distance(b, a, tol));
}

template <typename Scalar>
struct HullRepresentation {
    PointCloudT<Scalar> support;
    std::optional<VectorX<Scalar>> weights;

    VectorX<Scalar> reconstruct() const
    {
        if (!weights)
            throw Error("hull representation carries no weights");
        return support.points() * *weights;
    }
};

/// Rewrites target = sum w_i v_i using at most d+1 of the support points by
/// repeatedly moving the weights along an affine dependence of the active
/// points until one weight vanishes.
template <typename Scalar>
HullRepresentation<Scalar> caratheodory_reduce(const VectorX<Scalar>& target, const PointCloudT<Scalar>& support,
                                               const VectorX<Scalar>& weights)
{
    const Index d = support.dim();
    if (target.size() != d)
        throw Error("caratheodory_reduce: target dimension mismatch");
    if (weights.size() != support.size())
        throw Error("caratheodory_reduce: weight count does not match support size");
    using std::abs;
    if ((weights.array() < Scalar(-1e-12)).any() || abs(weights.sum() - Scalar(1)) > Scalar(1e-12))
        throw Error("caratheodory_reduce: weights are not a point of the simplex");
    if ((support.points() * weights - target).norm() > Scalar(1e-9))
        throw Error("caratheodory_reduce: weights do not reconstruct the target");

    std::vector<Index> active;
    std::vector<Scalar> lambda;
    for (Index j = 0; j < support.size(); ++j) {
        if (weights(j) > Scalar(0)) {
            active.push_back(j);
            lambda.push_back(weights(j));
        }
    }
    while (static_cast<Index>(active.size()) > d + 1) {
        const auto m = static_cast<Index>(active.size()) - 1;
        MatrixX<Scalar> D(d, m);
        for (Index k = 0; k < m; ++k)
            D.col(k) = support.point(active[static_cast<std::size_t>(k + 1)]) - support.point(active[0]);
        // m > d, so D has a nontrivial kernel; the last right singular vector spans part of it.
        Eigen::JacobiSVD<MatrixX<Scalar>> svd(D, Eigen::ComputeFullV);
        const VectorX<Scalar> kernel = svd.matrixV().col(m - 1);
        std::vector<Scalar> mu(active.size());
        mu[0] = -kernel.sum();
        for (Index k = 0; k < m; ++k)
            mu[static_cast<std::size_t>(k + 1)] = kernel(k);
        if (std::none_of(mu.begin(), mu.end(), [](Scalar v) { return v > Scalar(0); })) {
            for (auto& v : mu)
                v = -v;
        }
        std::size_t hit = 0;
        Scalar step = std::numeric_limits<Scalar>::infinity();
        for (std::size_t k = 0; k < mu.size(); ++k) {
            if (mu[k] > Scalar(0) && lambda[k] / mu[k] < step) {
                step = lambda[k] / mu[k];
                hit = k;
            }
        }
        for (std::size_t k = 0; k < mu.size(); ++k)
            lambda[k] -= step * mu[k];
        lambda[hit] = Scalar(0);
        std::vector<Index> kept;
        std::vector<Scalar> kept_lambda;
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (lambda[k] > Scalar(0)) {
                kept.push_back(active[k]);
                kept_lambda.push_back(lambda[k]);
            }
        }
        active = std::move(kept);
        lambda = std::move(kept_lambda);
    }

    const Scalar total = std::accumulate(lambda.begin(), lambda.end(), Scalar(0));
    MatrixX<Scalar> pts(d, static_cast<Index>(active.size()));
    VectorX<Scalar> w(static_cast<Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
        pts.col(static_cast<Index>(k)) = support.point(active[k]);
        w(static_cast<Index>(k)) = lambda[k] / total;
    }
    return {PointCloudT<Scalar>(std::move(pts)), std::move(w)};
}

} // namespace eulerdi

#endif // EULERDI_GEOMETRY_HPP
