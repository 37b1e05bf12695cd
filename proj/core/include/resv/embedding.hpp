#pragma once

#include "resv/random.hpp"
#include "resv/reservoir.hpp"
#include "resv/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace resv {

/// A = scale * Q diag(u) Q^T, u_i ~ U[0, 1], Q Haar-orthogonal;
/// C (N x 1) with entries ~ U[-0.5, 0.5].
struct RandomReservoirSpec {
    int n = 7;
    double scale = 30.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Haar-distributed orthogonal matrix from the QR factorisation of a Gaussian
/// matrix, with columns sign-corrected so that diag(R) > 0.
[[nodiscard]] Mat haar_orthogonal(int n, Rng& rng);

/// Draw order: Q (n*n normals, column-major), then u, then C. Eigenvalue
/// draws below 1e-6 are redrawn. Deterministic given the generator state.
[[nodiscard]] LinearReservoir generate_reservoir(const RandomReservoirSpec& spec, Rng& rng);

/// Uses Rng(spec.seed).
[[nodiscard]] LinearReservoir generate_reservoir(const RandomReservoirSpec& spec);

struct DistinctEigenvalues {
    bool distinct = false;
    CVec eigenvalues;  // sorted by (real, imag)
};

/// Distinct iff every pair differs by more than tol * (1 + max |lambda|).
[[nodiscard]] DistinctEigenvalues check_distinct_eigs(const Mat& j, double tol = 1e-9);
[[nodiscard]] bool eigenvalues_distinct(const CVec& eigs, double tol = 1e-9);

struct EmbeddingReport {
    std::uint64_t seed = 0;
    CVec eigenvalues;
    bool distinct = false;
    CMat columns;          // (A + lambda_j I)^{-1} C
    Vec singular_values;   // of `columns`, descending
    double smallest_singular_value = 0.0;
    int rank = 0;
    bool verdict = false;  // distinct && rank == q
};

/// Solves (A + lambda_j I) v_j = C over the complex numbers and measures the
/// rank of [v_1 .. v_q] with threshold tol * sigma_max. Throws
/// SpectralCollisionError when some lambda_j is within 1e-12 of a negated
/// eigenvalue of A.
[[nodiscard]] EmbeddingReport check_independence(const LinearReservoir& res, const CVec& eigs,
                                                 double tol = 1e-8,
                                                 double distinct_tol = 1e-9);

struct EmbeddingSweep {
    std::vector<EmbeddingReport> trials;  // seed = spec.seed + index
    double success_fraction = 0.0;
    double min_smallest_singular_value = 0.0;
};

/// Fraction of seeds spec.seed .. spec.seed + trials - 1 whose reservoir
/// satisfies both embedding conditions at the eigenvalues of `j`.
[[nodiscard]] EmbeddingSweep monte_carlo_embedding_rate(const RandomReservoirSpec& spec,
                                                        const Mat& j, int trials,
                                                        unsigned threads = 0,
                                                        double rank_tol = 1e-8);

/// {seed, eigenvalues: [[re, im]...], singular_values, rank, verdict}.
[[nodiscard]] std::string embedding_report_json(const EmbeddingReport& report);

/// Header `seed,rank,sigma_min_col,verdict`.
void write_sweep_csv(std::ostream& out, const EmbeddingSweep& sweep);

} // namespace resv
