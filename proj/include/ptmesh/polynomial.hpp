#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace ptmesh
{
    /// c[0] + c[1] x + c[2] x^2 + c[3] x^3 + c[4] x^4
    struct Quartic
    {
        std::array<double, 5> c {};

        double operator()(double x) const;
        bool is_finite() const;
    };

    struct UnitIntervalRoots
    {
        std::vector<double> values;  // ascending, clamped to [0,1]
        bool degenerate = false;     // identically zero: every x solves it
    };

    /// Horner evaluation; coefficients in ascending degree.
    double evaluate_polynomial(std::span<const double> coeffs, double x);

    /// Eigenvalues of the companion matrix of the monic polynomial
    /// x^n + low[n-1] x^(n-1) + ... + low[0], found with shifted QR on the
    /// (already Hessenberg) companion matrix. n <= 4 is the intended use.
    std::vector<std::complex<double>> companion_roots(std::span<const double> low, int max_iterations = 64, double tolerance = 1e-12);

    /// Real roots in [0,1] of a polynomial of degree <= 4 (ascending coefficients).
    /// Vanishing leading coefficients deflate the degree; linear and quadratic
    /// cases use closed forms, cubic and quartic the companion matrix.
    UnitIntervalRoots solve_polynomial_unit_interval(std::span<const double> coeffs, double tol_real = 1e-9);

    UnitIntervalRoots solve_quartic_unit_interval(const Quartic & q, double tol_real = 1e-9);
}
