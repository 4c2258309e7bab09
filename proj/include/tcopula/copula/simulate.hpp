#pragma once

#include "tcopula/copula/spec.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>

namespace tcopula::copula {

/// Exact sampler for the copula:
///   Z ~ N(0, Sigma), S ~ U(0, 1) shared by all coordinates,
///   X_k = Z_k sqrt(nu_k / chi2_{nu_k}^{-1}(S)),  U_k = t_{nu_k}(X_k).
///
/// Rows are produced in chunks of kChunkRows; chunk c draws from its own generator seeded by
/// a SplitMix64 mix of (seed, c), so output is identical for any thread count. Concurrent
/// samplers need distinct seeds to give independent streams.
class Sampler {
public:
    static constexpr Eigen::Index kChunkRows = 4096;

    Sampler(CopulaSpec spec, std::uint64_t seed);

    const CopulaSpec& spec() const noexcept { return spec_; }

    /// Fills `x` (latent scale: t_{nu_k} margins, or N(0,1) for a Gaussian spec) and/or `u`
    /// (uniform scale, strictly inside (0, 1)) with `rows` draws of chunk `chunk`.
    /// Either output may be null.
    void draw_chunk(std::uint64_t chunk, Eigen::Index rows, Eigen::MatrixXd* x,
                    Eigen::MatrixXd* u) const;

    using ChunkVisitor = std::function<void(std::uint64_t chunk, Eigen::Index first_row,
                                            const Eigen::MatrixXd& x, const Eigen::MatrixXd& u)>;
    /// Streams K draws chunk by chunk; the visitor may run concurrently on distinct chunks.
    void for_each_chunk(Eigen::Index k, unsigned threads, bool want_x, bool want_u,
                        const ChunkVisitor& visit) const;

private:
    CopulaSpec spec_;
    std::uint64_t seed_;
    std::vector<double> distinct_dofs_;
    std::vector<int> coord_dof_;
};

UniformSample simulate(const CopulaSpec& spec, Eigen::Index k, std::uint64_t seed,
                       unsigned threads = 1);

/// The latent draws X (K x n) behind simulate() with the same seed.
Eigen::MatrixXd simulate_latent(const CopulaSpec& spec, Eigen::Index k, std::uint64_t seed,
                                unsigned threads = 1);

}  // namespace tcopula::copula
