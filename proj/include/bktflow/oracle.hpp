// oracle.hpp -- brute-force ground truth at desk scale: exact
// grand-canonical enumeration, sine-Gordon Monte Carlo with a Wick-series
// companion, and Gaussian-identity / multiscale-measure checks.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bktflow/covariance.hpp"
#include "bktflow/lattice_green.hpp"

namespace bkt::oracle {

struct ProbePair {
    std::array<std::int64_t, 2> x;
    std::array<std::int64_t, 2> y;
    double eta = 0.5;  // charges +eta at x, -eta at y
};

struct EnumerationResult {
    double z_value = 1.0;              // partition function
    std::vector<double> order_terms;   // contribution of each even order
    int n_max = 0;
    bool series_ok = true;             // last order below control fraction
};

// Z = sum_{n even <= n_max} z^n/((n/2)!)^2 sum_{x+ tuples, x- tuples}
//     e^{-beta H}; probes add fixed fractional charges to H.
EnumerationResult enumerate_Z(const green::LatticeSpec& spec, double beta,
                              double z, int n_max,
                              const green::PotentialTable& table,
                              const std::optional<ProbePair>& probes = {},
                              double series_control = 0.5);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    double imag_mean = 0.0;    // diagnostic; expected 0 for insertions
    double imag_stderr = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::string to_json(const std::string& params) const;
};

// E[e^{2z sum cos phi} (e^{i eta (phi_x - phi_y)})] over the Gaussian
// field with covariance beta * W(.;m), by spectral synthesis.
McEstimate sine_gordon_mc(const green::LatticeSpec& spec, double beta,
                          double m, double z, std::uint64_t samples,
                          std::uint64_t seed,
                          const std::optional<ProbePair>& insertion = {});

// Exact z-power series of the same expectation via Wick's theorem,
// truncated at n_max (<= 4 kept practical).
struct WickSeries {
    double value = 0.0;
    std::vector<double> order_terms;  // (2z)^n/n! E[(sum cos)^n ...]
};
WickSeries wick_series(const green::LatticeSpec& spec, double beta, double m,
                       double z, int n_max,
                       const std::optional<ProbePair>& insertion = {});

// MC estimator of the SAME truncated z-series (sample moments of
// sum cos phi); unbiased for wick_series at every n_max, so the two can
// be compared at face value without exponential-tail bias.
McEstimate sine_gordon_mc_series(const green::LatticeSpec& spec, double beta,
                                 double m, double z, int n_max,
                                 std::uint64_t samples, std::uint64_t seed,
                                 const std::optional<ProbePair>& insertion = {});

struct SineGordonIdentityReport {
    std::vector<double> masses;
    std::vector<double> closed_form;  // E[e^{i sum sigma phi}] at each m
    double neutral_limit = 0.0;       // m -> 0 target when neutral
    bool neutral = false;
    bool trend_ok = false;            // non-neutral: |value| decreasing
};

SineGordonIdentityReport verify_sine_gordon_identity(
    const green::LatticeSpec& spec, double beta,
    const std::vector<double>& masses, const std::vector<double>& charges,
    const std::vector<std::array<std::int64_t, 2>>& positions);

struct IdentityCheck {
    std::string name;
    double lhs = 0.0;      // measured (MC) or exact-algebra value
    double rhs = 0.0;      // closed form
    double stderr_ = 0.0;  // 0 for exact checks
    bool exact = false;
    bool pass = false;
};

struct GaussianIdentityReport {
    std::vector<IdentityCheck> checks;
    bool all_pass = true;
    std::string to_json() const;
};

// The seven truncated-moment identities of a single covariance scale,
// exact ones via kernel algebra, exponential ones by MC on a periodic
// box (side chosen to cover the kernel range).
GaussianIdentityReport verify_gaussian_identities(
    const cov::CovarianceFamily& fam, int j, double alpha,
    std::uint64_t samples, std::uint64_t seed, std::int64_t box_side = 0,
    double n_sigma = 3.0);

struct MultiscaleReport {
    std::vector<IdentityCheck> covariance_checks;  // Cov(sum) vs sum Gamma
    double max_scale_sum_residual = 0.0;  // vs -(1/2pi)ln|x| + c~_E
    bool all_pass = true;
    std::string to_json() const;
};

MultiscaleReport verify_multiscale_sampling(const cov::CovarianceFamily& fam,
                                            int j_top, std::uint64_t samples,
                                            std::uint64_t seed,
                                            std::int64_t box_side,
                                            double n_sigma = 3.0);

// Gaussian field on a periodic box with prescribed translation-invariant
// covariance, sampled by spectral synthesis; sample i is a pure function
// of (seed, i).
class GaussianField {
  public:
    GaussianField(std::int64_t side, const std::vector<double>& covariance_row,
                  std::uint64_t seed);

    std::int64_t side() const { return side_; }
    std::size_t size() const { return std::size_t(side_ * side_); }
    // fills field values for sample index
    void sample(std::uint64_t index, std::vector<double>& out) const;
    double covariance(std::int64_t dx0, std::int64_t dx1) const;

  private:
    std::int64_t side_;
    std::uint64_t seed_;
    std::vector<double> mix_;          // real mixing kernel, row-major
    std::vector<double> sqrt_lambda_;  // cached spectrum square root
    std::vector<double> cov_;          // realized covariance row
};

}  // namespace bkt::oracle
