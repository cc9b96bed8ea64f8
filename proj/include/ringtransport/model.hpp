// model.hpp - tight-binding chain between two dissipative ring contacts
//
// Matrix convention used throughout the library: a single-particle density
// matrix stores rho(i, j) = <a_j^dagger a_i>, so that a quadratic Hamiltonian
// with single-particle matrix h generates d(rho)/dt = -i [h, rho].

#pragma once

#include <cstddef>
#include <string>

#include "ringtransport/numerics.hpp"
#include "ringtransport/types.hpp"

namespace ringtransport {

// Inverse temperature with an explicit zero-temperature state (beta = infinity).
class InverseTemperature {
public:
    InverseTemperature() = default;  // infinite
    explicit InverseTemperature(double beta);

    static InverseTemperature infinite() { return {}; }
    static InverseTemperature parse(const std::string& text);  // number or "inf"

    bool is_infinite() const { return infinite_; }
    double value() const;  // throws for the infinite state
    std::string to_string() const;

    friend bool operator==(const InverseTemperature&, const InverseTemperature&) = default;

private:
    bool infinite_ = true;
    double beta_ = 0.0;
};

struct ContactSpec {
    double mu = 0.0;
    InverseTemperature beta;

    friend bool operator==(const ContactSpec&, const ContactSpec&) = default;
};

struct ModelParams {
    int L = 5;             // chain sites
    int M = 100;           // ring sites per contact
    double Js = 1.0;       // chain hopping
    double Jr = 1.0;       // ring hopping
    double epsilon = 0.4;  // chain-contact coupling
    double gamma = 0.1;    // contact relaxation rate
    ContactSpec left;      // attached to site 1
    ContactSpec right;     // attached to site L

    // Throws ConfigError. max_dim caps the single-particle dimension 2M + L.
    void validate(std::size_t max_dim = 4096) const;

    static ModelParams standard();
};

// Block layout of the total single-particle space: (contact 1 | chain | contact L).
// The right contact can be detached, leaving (contact 1 | chain).
struct BlockLayout {
    int M = 0;
    int L = 0;
    bool right_attached = true;

    int contact1_offset() const { return 0; }
    int chain_offset() const { return M; }
    int contactL_offset() const { return M + L; }
    int dim() const { return right_attached ? 2 * M + L : M + L; }

    static BlockLayout of(const ModelParams& p, bool right_attached = true) {
        return {p.M, p.L, right_attached};
    }
};

struct OperatorSet {
    BlockLayout layout;
    CMatrix H_s;      // L x L chain Hamiltonian
    CMatrix H_r;      // M x M ring Hamiltonian in the Bloch basis (diagonal)
    CMatrix V_1;      // M x L coupling to site 1
    CMatrix V_L;      // M x L coupling to site L
    CMatrix H_total;  // dim x dim, off-diagonal blocks epsilon * V
    CMatrix J_op;     // L x L mean current operator
};

OperatorSet build_operators(const ModelParams& params, bool right_attached = true,
                            std::size_t max_dim = 4096);

// Chain Hamiltonian, -Js/2 on the first off-diagonals.
CMatrix chain_hamiltonian(int L, double Js);

// Mean current operator: -(Js / 2i) / (L - 1) * sum_l (|l+1><l| - h.c.).
CMatrix current_operator(int L, double Js);

// Bloch-mode energy -Jr cos(2 pi k / M), k = 1..M.
double ring_mode_energy(int k, int M, double Jr);

// Fermi-Dirac occupation of ring mode k (1-based).
double fermi_occupation(int k, const ContactSpec& contact, const ModelParams& params);

// Occupation of a state with energy e, i.e. 1 / (exp(beta (e - mu)) + 1).
double fermi_function(double energy, const ContactSpec& contact);

// Diagonal M x M thermal SPDM of one contact.
CMatrix thermal_contact_spdm(const ContactSpec& contact, const ModelParams& params);

// Thermal state of the contact blocks with an empty chain, in the total layout.
CMatrix thermal_total_spdm(const ModelParams& params, bool right_attached = true);

numerics::Spectrum chain_eigensystem(const ModelParams& params);

struct FermiLevel {
    double mu;
    double delta_mu;
};

// mu = -Jr cos(kappa_F); delta_mu = Jr sin(kappa_F) * 2 pi / M (one ring level spacing).
FermiLevel kappa_to_mu(double kappa_F, double Jr, int M);

enum class BiasSplit { Symmetric, OneSided };

// Sets contact chemical potentials: symmetric mu +- dmu/2, or one-sided (mu + dmu, mu).
ModelParams with_bias(ModelParams params, double mu, double delta_mu,
                      BiasSplit split = BiasSplit::Symmetric);

} // namespace ringtransport
