#include "ptmesh/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ptmesh
{
    namespace
    {
        using cd = std::complex<double>;

        // Leading coefficients below this fraction of the largest one are treated as zero.
        constexpr double kDeflateRelative = 1e-14;
        constexpr double kClusterWidth = 1e-7;

        double max_abs(std::span<const double> c)
        {
            double m = 0.0;
            for (double v : c)
            {
                m = std::max(m, std::abs(v));
            }
            return m;
        }

        double derivative_at(std::span<const double> c, double x)
        {
            double d = 0.0;
            for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k)
            {
                d = d * x + k * c[k];
            }
            return d;
        }

        // A few Newton steps against the original coefficients; keeps the step
        // only while the residual shrinks.
        double polish(std::span<const double> c, double x)
        {
            double fx = std::abs(evaluate_polynomial(c, x));
            for (int it = 0; it < 4 && fx > 0.0; ++it)
            {
                const double d = derivative_at(c, x);
                if (d == 0.0)
                {
                    break;
                }
                const double xn = x - evaluate_polynomial(c, x) / d;
                const double fn = std::abs(evaluate_polynomial(c, xn));
                if (!(fn < fx))
                {
                    break;
                }
                x = xn;
                fx = fn;
            }
            return x;
        }

        // Diagonal similarity with powers of two that evens out row and column
        // norms; a badly scaled companion matrix otherwise loses its small roots.
        void balance(std::vector<cd> & h, int n)
        {
            constexpr double radix = 2.0;
            bool done = false;
            while (!done)
            {
                done = true;
                for (int i = 0; i < n; ++i)
                {
                    double c = 0.0, r = 0.0;
                    for (int j = 0; j < n; ++j)
                    {
                        if (j != i)
                        {
                            c += std::abs(h[static_cast<std::size_t>(j * n + i)]);
                            r += std::abs(h[static_cast<std::size_t>(i * n + j)]);
                        }
                    }
                    if (c == 0.0 || r == 0.0)
                    {
                        continue;
                    }
                    const double s = c + r;
                    double f = 1.0;
                    double g = r / radix;
                    while (c < g)
                    {
                        f *= radix;
                        c *= radix * radix;
                    }
                    g = r * radix;
                    while (c > g)
                    {
                        f /= radix;
                        c /= radix * radix;
                    }
                    if ((c + r) / f < 0.95 * s)
                    {
                        done = false;
                        for (int j = 0; j < n; ++j)
                        {
                            h[static_cast<std::size_t>(i * n + j)] /= f;
                            h[static_cast<std::size_t>(j * n + i)] *= f;
                        }
                    }
                }
            }
        }

        void wilkinson_shift(const cd & a, const cd & b, const cd & c, const cd & d, cd & shift)
        {
            // eigenvalue of [[a,b],[c,d]] closest to d
            const cd tr_half = (a + d) * 0.5;
            const cd det = a * d - b * c;
            const cd disc = std::sqrt(tr_half * tr_half - det);
            const cd l1 = tr_half + disc;
            const cd l2 = tr_half - disc;
            shift = std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
        }
    }

    double Quartic::operator()(double x) const { return evaluate_polynomial(c, x); }

    bool Quartic::is_finite() const
    {
        return std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
    }

    double evaluate_polynomial(std::span<const double> coeffs, double x)
    {
        double v = 0.0;
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
        {
            v = v * x + *it;
        }
        return v;
    }

    std::vector<std::complex<double>> companion_roots(std::span<const double> low, int max_iterations, double tolerance)
    {
        const int n = static_cast<int>(low.size());
        std::vector<cd> roots;
        if (n == 0)
        {
            return roots;
        }

        // Companion matrix: ones on the subdiagonal, -low in the last column.
        std::vector<cd> h(static_cast<std::size_t>(n * n), cd(0.0));
        auto at = [&](int r, int c) -> cd & { return h[static_cast<std::size_t>(r * n + c)]; };
        for (int r = 1; r < n; ++r)
        {
            at(r, r - 1) = 1.0;
        }
        for (int r = 0; r < n; ++r)
        {
            at(r, n - 1) = -low[r];
        }
        balance(h, n);

        int hi = n - 1;
        int iterations = 0;
        std::vector<double> gc(static_cast<std::size_t>(n));
        std::vector<cd> gs(static_cast<std::size_t>(n));
        while (hi >= 0)
        {
            if (hi == 0)
            {
                roots.push_back(at(0, 0));
                break;
            }
            int lo = hi;
            while (lo > 0)
            {
                const double scale = std::abs(at(lo - 1, lo - 1)) + std::abs(at(lo, lo));
                if (std::abs(at(lo, lo - 1)) <= tolerance * (scale > 0.0 ? scale : 1.0))
                {
                    at(lo, lo - 1) = 0.0;
                    break;
                }
                --lo;
            }
            if (lo == hi)
            {
                roots.push_back(at(hi, hi));
                --hi;
                iterations = 0;
                continue;
            }
            if (iterations >= max_iterations)
            {
                throw std::runtime_error("companion QR did not converge");
            }
            ++iterations;

            cd shift;
            wilkinson_shift(at(hi - 1, hi - 1), at(hi - 1, hi), at(hi, hi - 1), at(hi, hi), shift);
            if (iterations % 11 == 0)
            {
                // exceptional shift to break cycles
                shift += std::abs(at(hi, hi - 1)) * cd(0.75, 0.5);
            }

            for (int k = lo; k <= hi; ++k)
            {
                at(k, k) -= shift;
            }
            for (int k = lo; k < hi; ++k)
            {
                const cd a = at(k, k);
                const cd b = at(k + 1, k);
                const double rho = std::hypot(std::abs(a), std::abs(b));
                double c;
                cd s;
                if (std::abs(a) == 0.0)
                {
                    c = 0.0;
                    s = 1.0;
                }
                else
                {
                    c = std::abs(a) / rho;
                    s = (a / std::abs(a)) * std::conj(b) / rho;
                }
                gc[k] = c;
                gs[k] = s;
                for (int j = k; j <= hi; ++j)
                {
                    const cd x = at(k, j);
                    const cd y = at(k + 1, j);
                    at(k, j) = c * x + s * y;
                    at(k + 1, j) = -std::conj(s) * x + c * y;
                }
            }
            for (int k = lo; k < hi; ++k)
            {
                const double c = gc[k];
                const cd s = gs[k];
                const int last = std::min(k + 2, hi);
                for (int i = lo; i <= last; ++i)
                {
                    const cd x = at(i, k);
                    const cd y = at(i, k + 1);
                    at(i, k) = x * c + y * std::conj(s);
                    at(i, k + 1) = -x * s + y * c;
                }
            }
            for (int k = lo; k <= hi; ++k)
            {
                at(k, k) += shift;
            }
        }
        return roots;
    }

    UnitIntervalRoots solve_polynomial_unit_interval(std::span<const double> coeffs, double tol_real)
    {
        if (coeffs.size() > 5)
        {
            throw std::invalid_argument("polynomial degree above 4 is not supported");
        }
        for (double v : coeffs)
        {
            if (!std::isfinite(v))
            {
                throw std::invalid_argument("non-finite polynomial coefficient");
            }
        }

        UnitIntervalRoots out;
        const double scale = max_abs(coeffs);
        if (scale == 0.0)
        {
            out.degenerate = true;
            return out;
        }

        int degree = static_cast<int>(coeffs.size()) - 1;
        while (degree > 0 && std::abs(coeffs[degree]) <= kDeflateRelative * scale)
        {
            --degree;
        }

        std::vector<double> candidates;
        if (degree == 1)
        {
            candidates.push_back(-coeffs[0] / coeffs[1]);
        }
        else if (degree == 2)
        {
            const double a = coeffs[2], b = coeffs[1], c = coeffs[0];
            const double disc = b * b - 4.0 * a * c;
            const double disc_tol = 1e-12 * (b * b + std::abs(4.0 * a * c));
            if (disc >= 0.0)
            {
                const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
                candidates.push_back(q / a);
                if (q != 0.0)
                {
                    candidates.push_back(c / q);
                }
                else
                {
                    candidates.push_back(0.0);
                }
            }
            else if (disc >= -disc_tol)
            {
                candidates.push_back(-b / (2.0 * a));
            }
        }
        else if (degree >= 3)
        {
            std::vector<double> low(static_cast<std::size_t>(degree));
            for (int k = 0; k < degree; ++k)
            {
                low[k] = coeffs[k] / coeffs[degree];
            }
            for (const auto & z : companion_roots(low))
            {
                if (std::abs(z.imag()) <= tol_real)
                {
                    candidates.push_back(z.real());
                }
                else if (std::abs(z.imag()) <= 1e3 * tol_real && z.real() >= -tol_real && z.real() <= 1.0 + tol_real)
                {
                    // near-double real roots split into a conjugate pair; keep them
                    // only when the real part is a genuine zero after polishing
                    const double x = polish(coeffs.first(degree + 1), z.real());
                    const double fscale = scale * (1.0 + std::abs(x));
                    if (std::abs(evaluate_polynomial(coeffs.first(degree + 1), x)) <= 1e-12 * fscale)
                    {
                        candidates.push_back(x);
                    }
                }
            }
        }

        const auto active = coeffs.first(static_cast<std::size_t>(degree + 1));
        for (double x : candidates)
        {
            if (!std::isfinite(x))
            {
                continue;
            }
            x = polish(active, x);
            if (x < -tol_real || x > 1.0 + tol_real)
            {
                continue;
            }
            out.values.push_back(std::clamp(x, 0.0, 1.0));
        }
        std::sort(out.values.begin(), out.values.end());
        // A multiple root comes back as a cluster about sqrt(machine eps) wide;
        // keep the member with the smallest residual.
        std::vector<double> merged;
        for (double x : out.values)
        {
            if (!merged.empty() && x - merged.back() <= std::max(tol_real, kClusterWidth))
            {
                if (std::abs(evaluate_polynomial(active, x)) < std::abs(evaluate_polynomial(active, merged.back())))
                {
                    merged.back() = x;
                }
                continue;
            }
            merged.push_back(x);
        }
        out.values = std::move(merged);
        return out;
    }

    UnitIntervalRoots solve_quartic_unit_interval(const Quartic & q, double tol_real)
    {
        return solve_polynomial_unit_interval(q.c, tol_real);
    }
}
