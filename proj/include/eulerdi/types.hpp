#ifndef EULERDI_TYPES_HPP
#define EULERDI_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace eulerdi {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using Index = Eigen::Index;

/// Precondition or domain violation raised by any library call.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finite point set in R^d, stored column-wise (one point per column).
template <typename Scalar>
class PointCloudT {
public:
    PointCloudT() = default;

    explicit PointCloudT(MatrixX<Scalar> points) : points_(std::move(points))
    {
        if (points_.rows() < 1)
            throw Error("point cloud dimension must be at least 1");
        if (points_.cols() < 1)
            throw Error("point cloud must be non-empty");
        if (!points_.allFinite())
            throw Error("point cloud contains non-finite coordinates");
    }

    static PointCloudT singleton(const VectorX<Scalar>& p)
    {
        return PointCloudT(MatrixX<Scalar>(p));
    }

    static PointCloudT from_points(const std::vector<VectorX<Scalar>>& pts)
    {
        if (pts.empty())
            throw Error("point cloud must be non-empty");
        MatrixX<Scalar> m(pts.front().size(), static_cast<Index>(pts.size()));
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (pts[j].size() != m.rows())
                throw Error("point cloud: inconsistent point dimensions");
            m.col(static_cast<Index>(j)) = pts[j];
        }
        return PointCloudT(std::move(m));
    }

    /// Builds a cloud from `dim`-strided coordinates laid out point after point.
    static PointCloudT from_flat(Index dim, const std::vector<Scalar>& coords)
    {
        if (dim < 1 || coords.size() % static_cast<std::size_t>(dim) != 0)
            throw Error("point cloud: flat coordinate buffer does not match dimension");
        const Index n = static_cast<Index>(coords.size()) / dim;
        return PointCloudT(Eigen::Map<const MatrixX<Scalar>>(coords.data(), dim, n));
    }

    Index dim() const { return points_.rows(); }
    Index size() const { return points_.cols(); }
    auto point(Index i) const { return points_.col(i); }
    const MatrixX<Scalar>& points() const { return points_; }

private:
    MatrixX<Scalar> points_;
};

using PointCloud = PointCloudT<double>;

} // namespace eulerdi

#endif // EULERDI_TYPES_HPP
