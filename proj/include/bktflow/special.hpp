// special.hpp -- exponential integral, Bessel J0, adaptive quadrature.
#pragma once

#include <functional>

namespace bkt::special {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// E1(x) for x > 0.  Power series for x <= 1, modified-Lentz continued
// fraction above; ~1 ulp except deep in the underflow range.
double expint_e1(double x);

// E1(a) - E1(b), stable when both arguments are small (the individual
// logarithms cancel).  Requires a, b > 0.
double expint_e1_diff(double a, double b);

// int_0^x (exp(-u)-1)/u du = -E1(x) - ln x - gamma_E; smooth through x=0.
double en_integral(double x);

// Bessel J0.  Taylor series up to |x|=12, Hankel asymptotic expansion
// beyond; absolute error ~1e-11 in the crossover region.
double bessel_j0(double x);

// Modified Bessel K0, K1 for x > 0 (series below x=8, asymptotic above;
// relative error ~1e-7 near the crossover, better elsewhere).
double bessel_k0(double x);
double bessel_k1(double x);

// Adaptive Gauss-Kronrod (G7,K15) on [a,b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 1e-300,
                 int max_depth = 40);

// Semi-infinite integral via x = a + t/(1-t) substitution.
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double rel_tol = 1e-12, double abs_tol = 1e-300);

}  // namespace bkt::special
