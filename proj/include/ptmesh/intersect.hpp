#pragma once

// Intersection of two trilinear zero sets with a diagonal plane of a box.
//
// With x = z = u and y = v, a trilinear field H splits as
// (1 - v) A(u) + v B(u) where A interpolates corners {0,1,4,5} and B
// corners {2,3,6,7}. Eliminating v between two fields P and Q leaves a
// quartic in u whose coefficients are the anti-diagonal sums of
// C (Pa Qb^T - Pb Qa^T) C^T.

#include "ptmesh/polynomial.hpp"
#include "ptmesh/trilinear.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>

namespace ptmesh
{
    enum class DiagonalPlane
    {
        XZ,  // x = z, y free
        YZ,  // y = z, x free
        XY,  // x = y, z free
    };

    /// Corner values of two fields over the box spanned by `from` (corner 0)
    /// and `to` (corner 7).
    struct EdgeCorners
    {
        Corners P;
        Corners Q;
        Vec3 from = Vec3::Zero();
        Vec3 to = Vec3::Ones();

        Vec3 to_world(const Vec3 & t) const { return from + t.cwiseProduct(to - from); }
    };

    /// Maps [P0, P1, P4, P5] (or the y = 1 face) to power coefficients in u.
    Eigen::Matrix<double, 3, 4> interpolation_to_power();

    /// Quartic in u for the x = z plane.
    Quartic diagonal_quartic(const Corners & P, const Corners & Q);

    /// Corner values seen through an axis permutation so that `plane` becomes x = z.
    Corners permute_to_xz(const Corners & H, DiagonalPlane plane);

    struct PlaneHit
    {
        Vec3 t;                   // box-normalized coordinates
        bool degenerate = false;  // quartic vanished identically
    };

    /// Points of P = Q = 0 on one diagonal plane, nearest to the box-normalized
    /// chord point (hint, hint, hint) first. An identically-zero quartic
    /// yields the chord point itself.
    std::optional<PlaneHit> solve_diagonal_plane(const Corners & P, const Corners & Q, DiagonalPlane plane, double hint = 0.5);

    /// Root of the cubic Bezier Q((t,t,t)) in [0,1] nearest to `hint`.
    std::optional<double> solve_chord_cubic(const Corners & Q, double hint = 0.5);

    struct IntersectionResult
    {
        Vec3 point;      // world coordinates
        Vec3 t;          // box-normalized coordinates
        DiagonalPlane plane = DiagonalPlane::XZ;
        bool degenerate = false;
        bool fallback = false;  // every plane failed; chord point at hint
    };

    /// Tries x = z, then y = z, then x = y. Planes tying an axis along which
    /// the box has zero extent are tried first.
    IntersectionResult intersect_edge(const EdgeCorners & corners, double hint = 0.5);
}
