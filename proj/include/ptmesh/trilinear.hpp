#pragma once

// Trilinear interpolation algebra on the unit cube.
//
// Corners are indexed with the left-aligned, zero-trailing binarization:
// bit 0 selects x, bit 1 selects y and bit 2 selects z, so corner 1 is
// (1,0,0), corner 2 is (0,1,0), corner 4 is (0,0,1) and corner 7 is the
// corner opposite the origin. Corner values may be scalars (8x1) or
// feature vectors (8xF); the same templates serve both.

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <string>

namespace ptmesh
{
    template <typename Scalar>
    using Point3 = Eigen::Matrix<Scalar, 3, 1>;

    template <typename Scalar, int Features = 1>
    using CornerValues = Eigen::Matrix<Scalar, 8, Features>;

    using Vec3 = Point3<double>;
    using Corners = CornerValues<double>;

    constexpr int corner_bit(int corner, int axis) { return (corner >> axis) & 1; }

    constexpr std::array<int, 3> corner_offset(int corner)
    {
        return {corner_bit(corner, 0), corner_bit(corner, 1), corner_bit(corner, 2)};
    }

    namespace detail
    {
        template <typename Scalar>
        void check_unit_point(const Point3<Scalar> & w)
        {
            for (int j = 0; j < 3; ++j)
            {
                if (!(w[j] >= Scalar(0) && w[j] <= Scalar(1)))
                {
                    throw std::domain_error("interpolation weight outside [0,1]: component " + std::to_string(j));
                }
            }
        }

        template <typename Scalar>
        Scalar weight_unchecked(int corner, const Point3<Scalar> & w)
        {
            Scalar v(1);
            for (int j = 0; j < 3; ++j)
            {
                v *= corner_bit(corner, j) ? w[j] : Scalar(1) - w[j];
            }
            return v;
        }
    }

    /// Volume of the sub-box opposite to `corner` when the unit cube is split at `w`.
    template <typename Scalar>
    Scalar interp_weight(int corner, const Point3<Scalar> & w)
    {
        if (corner < 0 || corner > 7)
        {
            throw std::out_of_range("corner index must be in 0..7");
        }
        detail::check_unit_point(w);
        return detail::weight_unchecked(corner, w);
    }

    /// All eight weights; they sum to one.
    template <typename Scalar>
    Eigen::Matrix<Scalar, 8, 1> interp_weights(const Point3<Scalar> & w)
    {
        detail::check_unit_point(w);
        Eigen::Matrix<Scalar, 8, 1> out;
        for (int i = 0; i < 8; ++i)
        {
            out[i] = detail::weight_unchecked(i, w);
        }
        return out;
    }

    /// Trilinear interpolation of corner values. Returns a scalar for 8x1
    /// corner data and a row vector for 8xF feature data.
    template <typename Derived>
    auto trilinear(const Point3<typename Derived::Scalar> & w, const Eigen::MatrixBase<Derived> & corners)
    {
        using Scalar = typename Derived::Scalar;
        static_assert(Derived::RowsAtCompileTime == 8 || Derived::RowsAtCompileTime == Eigen::Dynamic);
        const Eigen::Matrix<Scalar, 8, 1> weights = interp_weights(w);
        if constexpr (Derived::ColsAtCompileTime == 1)
        {
            return Scalar(weights.dot(corners.derived()));
        }
        else
        {
            return Eigen::Matrix<Scalar, 1, Derived::ColsAtCompileTime>(weights.transpose() * corners.derived());
        }
    }

    /// Partial derivatives of the trilinear form with respect to w. For 8xF
    /// data the result is 3xF (row j holds d/dw_j).
    template <typename Derived>
    auto trilinear_gradient(const Point3<typename Derived::Scalar> & w, const Eigen::MatrixBase<Derived> & corners)
    {
        using Scalar = typename Derived::Scalar;
        detail::check_unit_point(w);
        Eigen::Matrix<Scalar, 3, 8> dweights;
        for (int i = 0; i < 8; ++i)
        {
            for (int j = 0; j < 3; ++j)
            {
                Scalar v = corner_bit(i, j) ? Scalar(1) : Scalar(-1);
                for (int k = 0; k < 3; ++k)
                {
                    if (k != j)
                    {
                        v *= corner_bit(i, k) ? w[k] : Scalar(1) - w[k];
                    }
                }
                dweights(j, i) = v;
            }
        }
        if constexpr (Derived::ColsAtCompileTime == 1)
        {
            return Point3<Scalar>(dweights * corners.derived());
        }
        else
        {
            return Eigen::Matrix<Scalar, 3, Derived::ColsAtCompileTime>(dweights * corners.derived());
        }
    }

    /// Control points of the cubic Bezier curve traced by the interpolant
    /// along the main diagonal (t,t,t). Row k is control point k.
    template <typename Derived>
    auto diagonal_bezier_control_points(const Eigen::MatrixBase<Derived> & corners)
    {
        using Scalar = typename Derived::Scalar;
        Eigen::Matrix<Scalar, 4, Derived::ColsAtCompileTime> ctrl(4, corners.cols());
        ctrl.row(0) = corners.row(0);
        ctrl.row(1) = (corners.row(1) + corners.row(2) + corners.row(4)) / Scalar(3);
        ctrl.row(2) = (corners.row(3) + corners.row(5) + corners.row(6)) / Scalar(3);
        ctrl.row(3) = corners.row(7);
        return ctrl;
    }

    /// Bernstein evaluation of a cubic Bezier curve given as a 4xF control matrix.
    template <typename Derived>
    auto bezier_eval(const Eigen::MatrixBase<Derived> & ctrl, typename Derived::Scalar t)
    {
        using Scalar = typename Derived::Scalar;
        const Scalar s = Scalar(1) - t;
        auto row = (s * s * s * ctrl.row(0) + Scalar(3) * s * s * t * ctrl.row(1) + Scalar(3) * s * t * t * ctrl.row(2) + t * t * t * ctrl.row(3)).eval();
        if constexpr (Derived::ColsAtCompileTime == 1)
        {
            return Scalar(row(0));
        }
        else
        {
            return row;
        }
    }

    /// Power-basis coefficients c0..c3 of a scalar cubic Bezier curve.
    template <typename Scalar>
    std::array<Scalar, 4> bezier_power_coefficients(const Eigen::Matrix<Scalar, 4, 1> & ctrl)
    {
        const Scalar p0 = ctrl[0], p1 = ctrl[1], p2 = ctrl[2], p3 = ctrl[3];
        return {p0, Scalar(3) * (p1 - p0), Scalar(3) * (p2 - Scalar(2) * p1 + p0), p3 - Scalar(3) * p2 + Scalar(3) * p1 - p0};
    }

    /// Position of corner `i` of the axis-aligned box spanned by `from` (corner 0)
    /// and `to` (corner 7). The box may have negative extent on any axis.
    template <typename Scalar>
    Point3<Scalar> box_corner(const Point3<Scalar> & from, const Point3<Scalar> & to, int corner)
    {
        Point3<Scalar> p = from;
        for (int j = 0; j < 3; ++j)
        {
            if (corner_bit(corner, j))
            {
                p[j] = to[j];
            }
        }
        return p;
    }
}
