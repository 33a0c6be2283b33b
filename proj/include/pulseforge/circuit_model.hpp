#pragma once

#include <optional>

#include "pulseforge/types.hpp"

namespace pf {

/// Physical parameters of the generic qubit circuit (capacitor, inductor,
/// junction in parallel). Energies are angular frequencies in rad/ns, the
/// external flux phi_e is in units of the reduced flux quantum.
struct CircuitSpec {
    Real ec = 0.0;     // charging energy E_C
    Real el = 0.0;     // inductive energy E_L
    Real ej = 0.0;     // Josephson energy E_J
    Real phi_e = 0.0;  // external flux / Phi_0, typically 0 or pi

    void validate() const;
};

/// SQUID coupling element between neighboring qubits. ejs is the total
/// Josephson energy of the two junctions; the loop-flux constraint
/// Phi_s'(t) = -Phi_s(t)/2 is baked into the coupling Hamiltonian.
struct CouplerSpec {
    Real ejs = 0.0;  // rad/ns

    void validate() const;
};

/// Truncated eigenbasis of the bare circuit: the n_keep lowest levels with
/// the operator matrix elements everything downstream needs. Frequencies are
/// stored relative to the ground state (omega[0] == 0).
struct QubitModel {
    Vector omega;     // eigenfrequencies omega_n - omega_0, rad/ns, ascending
    Matrix phi_mat;   // <psi_n| phi |psi_m>
    Matrix cos_mat;   // <psi_n| cos(phi) |psi_m>
    Matrix sin_mat;   // <psi_n| sin(phi) |psi_m>
    Vector parity;    // +1 / -1 parity index of each eigenstate (sweet spots)
    Real alpha_r = 0.0;    // relative nonlinearity (w21 - w10)/w10 - 1
    Real omega10 = 0.0;    // qubit transition frequency, rad/ns
    Real varphi10 = 0.0;   // |<psi_1| phi |psi_0>|
    CircuitSpec spec;      // parameters the model was built from
    int n_keep = 0;
    int basis_dim = 0;

    int dim() const { return n_keep; }
    /// Largest transition frequency of the truncated model.
    Real max_transition() const { return omega(omega.size() - 1); }
};

/// Dimensionless qubit-subspace projections of cos(phi) and sin(phi):
/// cos(phi) = g1 * 1 - gz * sigma_z, sin(phi) = gx * sigma_x, with the
/// convention sigma_z = |0><0| - |1><1|.
struct CouplingParams {
    Real g1 = 0.0;
    Real gz = 0.0;
    Real gx = 0.0;
};

/// Diagonalize H_0 = 4 E_C q^2 + (E_L/2) phi^2 - E_J cos(phi + phi_e) in the
/// harmonic-oscillator basis of the LC subcircuit and return the n_keep
/// lowest levels. Eigenvector phases are fixed so matrix-element signs are
/// reproducible: first nonzero oscillator-basis component positive, then
/// <psi_1|phi|psi_0> made positive by flipping |psi_1> if needed.
///
/// check_convergence re-diagonalizes at 1.25*basis_dim and fails if any kept
/// level moved by more than 1e-8 of the kept spectral spread.
QubitModel build_qubit_model(const CircuitSpec& spec, int basis_dim = 120, int n_keep = 10,
                             bool check_convergence = true);

/// Ratios defining a circuit family; absolute scale left open.
struct CircuitRatios {
    Real ej_over_ec = 4.0;
    Real el_over_ec = 1.0;
    Real phi_e = 0.0;
};

/// Fix the absolute energy scale of a ratio family so that omega10 equals
/// target_omega10 (rad/ns). H_0 is linear in E_C at fixed ratios, so this is
/// one diagonalization, a multiplicative rescale, and one verification pass.
CircuitSpec calibrate_scale(const CircuitRatios& ratios, Real target_omega10,
                            int basis_dim = 120, int n_keep = 10);

/// Qubit-subspace coupling parameters of Eq.-type cos/sin projections.
/// Warns (returns normally) if the model was not built at a flux sweet spot.
CouplingParams coupling_params(const QubitModel& model);

/// Effective nonlinearity of a qubit statically coupled through the SQUID:
/// diagonalizes H_q + E_Js cos(phi_s/2) cos(phi) and returns
/// (E2 - E1) - (E1 - E0) in rad/ns.
Real effective_nonlinearity(const CircuitSpec& spec, const CouplerSpec& coupler, Real phi_s,
                            int basis_dim = 120);

/// Member of the fixed-E_J/E_C family used throughout: solves for E_L/E_C so
/// that alpha_r hits the requested value (branch picked by sign: phi_e = 0
/// for negative, pi for positive), then calibrates E_C for target_omega10.
CircuitSpec family_spec_for_alpha(Real alpha_r_target, Real target_omega10,
                                  Real ej_over_ec = 4.0, int basis_dim = 120, int n_keep = 10);

}  // namespace pf
