// fock.hpp - exact many-body Lindblad evolution for small systems (reference oracle)
//
// Modes are fermionic with Jordan-Wigner ordering by mode index. The Hamiltonian
// sum_ij h_ij a_i^dagger a_j conserves particle number, and every state handled here
// is block-diagonal in particle number, so only those blocks are stored.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ringtransport/full_dynamics.hpp"
#include "ringtransport/markov.hpp"

namespace ringtransport::fock {

struct Channel {
    int mode = 0;
    double gain = 0.0;   // rate of the jump a^dagger
    double drain = 0.0;  // rate of the jump a
};

// Density matrix as one dense block per particle number N = 0..modes.
using BlockState = std::vector<CMatrix>;

class LindbladOracle {
public:
    LindbladOracle(const CMatrix& h, std::vector<Channel> channels, std::size_t max_dim = 4096);

    int modes() const { return modes_; }
    std::size_t dim() const { return std::size_t{1} << modes_; }

    BlockState product_state(const RVector& occupations) const;
    BlockState rhs(const BlockState& R) const;
    // R must be Hermitian (it stays Hermitian under the evolution).
    BlockState evolve(BlockState R, double t_span, double dt) const;
    // Unique stationary state by a dense solve of the vectorized generator (small systems only).
    BlockState stationary() const;

    // G(i, j) = Tr(a_j^dagger a_i R)
    CMatrix spdm(const BlockState& R) const;
    double trace(const BlockState& R) const;
    double min_eigenvalue(const BlockState& R) const;
    double max_rate() const;

private:
    BlockState apply(const BlockState& R, bool hermitian) const;

    struct Jump {
        std::uint32_t from;  // local index in the source block
        std::uint32_t to;    // local index in the target block
        double sign;
    };
    int modes_;
    std::vector<Channel> channels_;
    std::vector<std::vector<std::uint32_t>> states_;  // per N, bit patterns
    std::vector<std::uint32_t> local_;                // bit pattern -> local index
    std::vector<Eigen::SparseMatrix<cplx, Eigen::RowMajor>> H_;
    std::vector<RVector> decay_;  // per N, sum over channels of the outflow rate per state
    // per channel and N: a maps block N + 1 -> N, a^dagger maps N - 1 -> N
    std::vector<std::vector<std::vector<Jump>>> drain_jumps_;
    std::vector<std::vector<std::vector<Jump>>> gain_jumps_;
};

struct OracleSettings {
    double t_final = 50.0;
    double dt = 0.01;  // upper bound; the step also respects 0.01 / max rate
};

struct OracleResult : StationaryResult {
    CMatrix spdm;  // all modes, total layout
    double trace = 1.0;
    double min_eigenvalue = 0.0;
};

// Chain plus both contacts from thermal contacts and an empty chain, evolved to t_final.
OracleResult fock_space_oracle(const ModelParams& params, const OracleSettings& settings = {});

// Chain SPDM of the open chain with edge gain/drain (rates gt n_l and gt (1 - n_l)),
// stationary state of the many-body Lindbladian.
CMatrix open_chain_stationary_spdm(const MarkovChain& chain);

} // namespace ringtransport::fock
