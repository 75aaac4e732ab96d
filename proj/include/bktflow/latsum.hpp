// latsum.hpp -- sums of radially structured functions over Z^2.
//
// Every flow coefficient is a sum over y in Z^2 of a summand whose
// narrowest feature lives at some scale s.  When the truncated support
// fits in the exact budget the sum is done literally (D4 octant
// reduction, Hermite-tabulated profiles, blocked compensated
// accumulation).  Beyond the budget the same summand is integrated over
// R^2 instead: for features wider than ~L^2 lattice sites the
// lattice-vs-integral (Poisson) error is far below every tolerance used
// here.  Finite differences are kept as unit offsets in both routes.
#pragma once

#include <cstdint>
#include <functional>

namespace bkt::latsum {

struct Options {
    double exact_budget = 4096.0;  // max support radius for literal sums
    int nodes_per_scale = 256;     // table nodes per feature scale
    int n_theta = 16;              // angular nodes on [0, pi/4]
    double quad_rel = 1e-11;
    bool force_exact = false;      // tests: fail instead of integrating
    bool force_continuum = false;  // tests: dual-route comparisons
};

using RadialFn = std::function<double(double)>;

// A radial kernel with analytic derivatives.  Narrow kernels (feature up
// to ~256 sites) take literal unit-offset differences from value tables;
// wide kernels go through d1/d2 (their lattice differences sit below fp
// resolution of the values, while the derivative functions stay clean).
struct Kernel {
    RadialFn value;
    RadialFn d1;
    RadialFn d2;
    double feature = 1.0;
};

inline constexpr double kLatticeDiffCut = 256.0;

// sum_y |y|^{2 moment} F(|y|), F negligible beyond support_radius
double radial_sum(const RadialFn& f, double support_radius,
                  double feature_scale, int moment, const Options& opt);

// sum_y (1/2) sum_{mu in +-e0,+-e1} (d^mu A)(y) (d^mu B)(y)
double grad_pair_sum(const Kernel& a, const Kernel& b, double support_radius,
                     const Options& opt);

// sum_y (1/4) sum_{mu,nu} (d^{-mu} d^nu A)(y) (d^{-mu} d^nu B)(y)
double grad2_pair_sum(const Kernel& a, const Kernel& b,
                      double support_radius, const Options& opt);

}  // namespace bkt::latsum
