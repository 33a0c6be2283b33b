#pragma once

#include <optional>

#include "pulseforge/propagator.hpp"

namespace pf {

enum class CostMode { Fidelity, VPattern };

/// Target unitary on the computational subspace (d = 2 or 4) plus the cost
/// mode: phase-sensitive fidelity, or the phase-pattern cost used for V.
struct GateTarget {
    CMatrix u_target;
    CostMode mode = CostMode::Fidelity;

    int dim() const { return static_cast<int>(u_target.rows()); }
    void validate() const;
};

struct CostBreakdown {
    Real error_gate = 0.0;  // E (or C_V) on [0, t_g]
    Real error_long = 0.0;  // E (or C_V) on [-t_d, 10 t_g]
    Real ef = 0.0;          // max of the two
    Real penalty = 0.0;     // signal support outside the gate window
    Real total = 0.0;       // what the optimizer minimizes
};

/// Selector matrix onto the computational states (lowest two levels per
/// qubit): d^n x 2^n with unit columns ordered |0..0>, |0..1>, ...
CMatrix computational_selector(int model_dim, int n_qubits);

/// Computational block P U P from a propagation result; accepts either the
/// full operator or the column form U * P.
CMatrix computational_block(const CMatrix& u, int model_dim, int n_qubits);

/// E = 1 - |Tr(U_target^dag PUP)|^2 / d^2. Leakage makes PUP sub-unitary and
/// lowers the fidelity automatically.
Real gate_error(const CMatrix& block, const GateTarget& target);

/// Phase-insensitive cost for the two-qubit gate:
/// C_V = 1 - (sum_i |(V0^dag PUP)_ii|)^2 / d^2 with V0 the beta = gamma = 0
/// pattern. Zero exactly on V(beta, gamma) for any phases.
Real v_pattern_cost(const CMatrix& block4);

/// The V pattern with explicit phases; beta = gamma = 0 gives V0.
CMatrix v_matrix(Real beta, Real gamma);

struct VPhases {
    Real beta = 0.0;
    Real gamma = 0.0;
};

/// Realized phases of an (approximate) V: gamma from the |00> / |11>
/// diagonal asymmetry, beta from the middle block.
VPhases extract_v_phases(const CMatrix& block4);

/// Cost of a single-qubit pulse: errors over the gate window and the long
/// window, the support penalty, and the optimizer total E_F + penalty.
/// No filter: the long-window error equals the gate error and the penalty
/// integrals use the raw pulse.
CostBreakdown filtered_error_1q(const QubitModel& model, const PulseParams& pulse,
                                const FilterSpec* filter, const GateTarget& target, Real eta,
                                const ToleranceSpec& tol = {}, bool envelope_only = false);

/// Two-qubit analog; the flux pulse drives the coupler with energy ejs.
CostBreakdown filtered_error_2q(const QubitModel& m1, const QubitModel& m2,
                                const CouplerSpec& coupler, const PulseParams& pulse,
                                const FilterSpec* filter, const GateTarget& target, Real eta,
                                const ToleranceSpec& tol = {}, bool envelope_only = false);

/// Computational block realized by a pulse over [0, t_g] (diagnostics and
/// phase extraction after optimization).
CMatrix realized_block_1q(const QubitModel& model, const PulseParams& pulse,
                          const FilterSpec* filter, const ToleranceSpec& tol = {},
                          bool envelope_only = false);
CMatrix realized_block_2q(const QubitModel& m1, const QubitModel& m2, const CouplerSpec& coupler,
                          const PulseParams& pulse, const FilterSpec* filter,
                          const ToleranceSpec& tol = {}, bool envelope_only = false);

}  // namespace pf
