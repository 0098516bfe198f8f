#include "ptmesh/intersect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptmesh
{
    namespace
    {
        constexpr double kRangeTol = 1e-9;
        constexpr double kResidualRelative = 1e-7;
        constexpr double kCoefficientFloor = 1e-14;

        // new axis k reads old axis perm[k]
        std::array<int, 3> plane_permutation(DiagonalPlane plane)
        {
            switch (plane)
            {
                case DiagonalPlane::XZ: return {0, 1, 2};
                case DiagonalPlane::YZ: return {1, 0, 2};
                case DiagonalPlane::XY: return {0, 2, 1};
            }
            return {0, 1, 2};
        }

        Eigen::Vector4d alpha(const Corners & H) { return {H[0], H[1], H[4], H[5]}; }
        Eigen::Vector4d beta(const Corners & H) { return {H[2], H[3], H[6], H[7]}; }

        double power_eval(const Eigen::Vector3d & c, double u) { return c[0] + u * (c[1] + u * c[2]); }
    }

    Eigen::Matrix<double, 3, 4> interpolation_to_power()
    {
        Eigen::Matrix<double, 3, 4> C;
        C << 1, 0, 0, 0,
            -2, 1, 1, 0,
            1, -1, -1, 1;
        return C;
    }

    Quartic diagonal_quartic(const Corners & P, const Corners & Q)
    {
        const Eigen::Matrix<double, 3, 4> C = interpolation_to_power();
        const Eigen::Matrix4d M = alpha(P) * beta(Q).transpose() - beta(P) * alpha(Q).transpose();
        const Eigen::Matrix3d K = C * M * C.transpose();
        Quartic q;
        for (int r = 0; r < 3; ++r)
        {
            for (int c = 0; c < 3; ++c)
            {
                q.c[static_cast<std::size_t>(r + c)] += K(r, c);
            }
        }
        return q;
    }

    Corners permute_to_xz(const Corners & H, DiagonalPlane plane)
    {
        const auto perm = plane_permutation(plane);
        Corners out;
        for (int n = 0; n < 8; ++n)
        {
            int old = 0;
            for (int k = 0; k < 3; ++k)
            {
                old |= corner_bit(n, k) << perm[static_cast<std::size_t>(k)];
            }
            out[n] = H[old];
        }
        return out;
    }

    std::optional<PlaneHit> solve_diagonal_plane(const Corners & P, const Corners & Q, DiagonalPlane plane, double hint)
    {
        const auto perm = plane_permutation(plane);
        const Corners Pp = permute_to_xz(P, plane);
        const Corners Qp = permute_to_xz(Q, plane);
        const double scale = std::max(P.cwiseAbs().maxCoeff(), Q.cwiseAbs().maxCoeff());
        if (scale == 0.0)
        {
            return std::nullopt;
        }

        auto to_old = [&](const Vec3 & tn) {
            Vec3 t;
            for (int k = 0; k < 3; ++k)
            {
                t[perm[static_cast<std::size_t>(k)]] = tn[k];
            }
            return t;
        };

        // Coefficients are sums of products of corner values; anything below
        // this floor is rounding noise and would only pollute the leading term.
        Quartic q = diagonal_quartic(Pp, Qp);
        bool all_zero = true;
        for (double & c : q.c)
        {
            if (std::abs(c) <= kCoefficientFloor * scale * scale)
            {
                c = 0.0;
            }
            all_zero = all_zero && c == 0.0;
        }
        if (all_zero)
        {
            return PlaneHit {Vec3::Constant(std::clamp(hint, 0.0, 1.0)), true};
        }

        const auto roots = solve_quartic_unit_interval(q);
        if (roots.degenerate)
        {
            return PlaneHit {Vec3::Constant(std::clamp(hint, 0.0, 1.0)), true};
        }

        const Eigen::Matrix<double, 3, 4> C = interpolation_to_power();
        const Eigen::Vector3d aP = C * alpha(Pp), bP = C * beta(Pp);
        const Eigen::Vector3d aQ = C * alpha(Qp), bQ = C * beta(Qp);
        const Vec3 target = Vec3::Constant(hint);

        std::optional<PlaneHit> best;
        double best_dist = std::numeric_limits<double>::infinity();
        for (double u : roots.values)
        {
            const double a_p = power_eval(aP, u), b_p = power_eval(bP, u);
            const double a_q = power_eval(aQ, u), b_q = power_eval(bQ, u);
            double v;
            if (std::abs(a_p - b_p) > 1e-12 * scale)
            {
                v = a_p / (a_p - b_p);
            }
            else if (std::abs(a_q - b_q) > 1e-12 * scale)
            {
                v = a_q / (a_q - b_q);
            }
            else
            {
                // both fields constant in v along this u: any v solves it
                v = hint;
            }
            if (!(v >= -kRangeTol && v <= 1.0 + kRangeTol))
            {
                continue;
            }
            v = std::clamp(v, 0.0, 1.0);
            const Vec3 t = to_old(Vec3(u, v, u));
            if (std::abs(trilinear(t, P)) > kResidualRelative * scale || std::abs(trilinear(t, Q)) > kResidualRelative * scale)
            {
                continue;
            }
            const double d = (t - target).squaredNorm();
            if (d < best_dist)
            {
                best_dist = d;
                best = PlaneHit {t, false};
            }
        }
        return best;
    }

    std::optional<double> solve_chord_cubic(const Corners & Q, double hint)
    {
        const Eigen::Vector4d ctrl = diagonal_bezier_control_points(Q);
        const auto c = bezier_power_coefficients<double>(ctrl);
        const auto roots = solve_polynomial_unit_interval(c);
        if (roots.degenerate)
        {
            return std::clamp(hint, 0.0, 1.0);
        }
        std::optional<double> best;
        for (double t : roots.values)
        {
            if (!best || std::abs(t - hint) < std::abs(*best - hint))
            {
                best = t;
            }
        }
        return best;
    }

    IntersectionResult intersect_edge(const EdgeCorners & corners, double hint)
    {
        const Vec3 extent = corners.to - corners.from;
        std::array<bool, 3> flat {};
        for (int j = 0; j < 3; ++j)
        {
            flat[static_cast<std::size_t>(j)] = std::abs(extent[j]) <= 1e-12;
        }
        auto ties_flat_axis = [&](DiagonalPlane p) {
            switch (p)
            {
                case DiagonalPlane::XZ: return flat[0] || flat[2];
                case DiagonalPlane::YZ: return flat[1] || flat[2];
                case DiagonalPlane::XY: return flat[0] || flat[1];
            }
            return false;
        };

        std::array<DiagonalPlane, 3> order {DiagonalPlane::XZ, DiagonalPlane::YZ, DiagonalPlane::XY};
        std::stable_partition(order.begin(), order.end(), ties_flat_axis);

        IntersectionResult r;
        for (DiagonalPlane plane : order)
        {
            if (auto hit = solve_diagonal_plane(corners.P, corners.Q, plane, hint))
            {
                r.t = hit->t;
                r.plane = plane;
                r.degenerate = hit->degenerate;
                r.point = corners.to_world(r.t);
                return r;
            }
        }
        r.fallback = true;
        r.t = Vec3::Constant(std::clamp(hint, 0.0, 1.0));
        r.point = corners.to_world(r.t);
        return r;
    }
}
