#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pulseforge/objectives.hpp"

namespace pf {

enum class GateKind { Rn, RZ, V, CNOT };

/// One gate: equatorial rotation Rn(phi, theta), Z rotation, the native
/// two-qubit V, or a CNOT (compiled away before scheduling).
struct GateOp {
    GateKind kind = GateKind::Rn;
    int q0 = 0;       // first qubit (control for CNOT)
    int q1 = -1;      // second qubit (two-qubit gates)
    Real phi = 0.0;   // rotation axis in the equatorial plane
    Real theta = 0.0; // rotation angle

    static GateOp rn(int q, Real phi, Real theta) { return {GateKind::Rn, q, -1, phi, theta}; }
    static GateOp rz(int q, Real theta) { return {GateKind::RZ, q, -1, 0.0, theta}; }
    static GateOp v(int q) { return {GateKind::V, q, q + 1, 0.0, 0.0}; }
    static GateOp cnot(int c, int t) { return {GateKind::CNOT, c, t, 0.0, 0.0}; }
};

struct Circuit {
    int n_qubits = 0;
    std::vector<GateOp> gates;

    void validate() const;  // indices in range, two-qubit ops nearest-neighbor
};

/// 2x2 rotation matrices (sigma_z = |0><0| - |1><1| convention).
CMatrix rn_matrix(Real phi, Real theta);
CMatrix rz_matrix(Real theta);

/// Target unitary of a gate: 2x2 for rotations, 4x4 for V (the beta = gamma
/// = 0 pattern, paired with the v_pattern cost mode) and CNOT.
struct TargetSpec {
    CMatrix u;
    CostMode mode;
};
TargetSpec target_unitary(const GateOp& g);

/// Dense unitary of a circuit on 2^n_qubits dimensions; every V uses the
/// supplied realized phases.
CMatrix compose_unitary(const Circuit& c, Real v_beta, Real v_gamma);

/// A library pulse placed on the time axis; the waveform itself is never
/// modified, clocking and sign flips do the work.
struct PlacedPulse {
    PulseParams pulse;
    Real start = 0.0;
};

/// Realize a rotation about an axis shifted by dphi with the same waveform
/// started t_dphi = (dphi / 2 pi) T_q later.
PlacedPulse shift_pulse(const PulseParams& p, Real dphi, const QubitModel& model);

/// Accumulated phase of the quasi-adiabatic Z gate for a carrier-free
/// envelope: theta = -int_0^tg [sqrt(w10^2 + 4 phi10^2 W(t)^2) - w10] dt.
Real adiabatic_z_phase(const QubitModel& model, const PulseParams& envelope);

/// CNOT from two V applications, R_Z(gamma) corrections, and fixed
/// rotations; valid for arbitrary beta, gamma. Verified against the dense
/// CNOT on construction (throws numerical_error on failure).
Circuit cnot_decomposition(Real beta, Real gamma, int control = 0, int target = 1);

/// Z-elimination result: a circuit with no RZ gates plus the per-qubit
/// boundary Z rotations it was peeled to,
/// original = Rz_out (x) eliminated (x) Rz_in  up to global phase.
struct EliminatedCircuit {
    Circuit circuit;
    std::vector<Real> z_in;
    std::vector<Real> z_out;
};
EliminatedCircuit eliminate_z(const Circuit& c);

/// The compressed three-qubit Shor-15 circuit (H + two CNOTs with qubit 1 as
/// control, 0-indexed middle qubit) compiled to 4 V applications and 7
/// equatorial rotations for the realized V phase gamma. Equivalence to the
/// logical circuit up to boundary Z rotations is checked on construction.
Circuit shor15_program(Real gamma);

/// The logical (uncompiled) Shor-15 circuit: H on the middle qubit, CNOTs to
/// both neighbors.
Circuit shor15_logical();

/// Optimized pulses the scheduler draws from. Drive pulses implement Y-axis
/// rotations (axis phi = pi/2); all other axes come from shifts and flips.
struct PulseLibrary {
    std::optional<PulseParams> ry_half;  // R_Y(pi/2)
    std::optional<PulseParams> ry_pi;    // R_Y(pi)
    std::optional<PulseParams> rz;       // carrier-free R_Z pulse (mixed mode)
    Real rz_theta = 0.0;                 // angle realized by the rz pulse
    std::optional<PulseParams> v_pulse;  // coupler flux pulse
    CouplerSpec coupler;
    std::optional<FilterSpec> filter;
    bool envelope_only = false;
};

struct ScheduledPulse {
    int channel = 0;  // 0..n-1 qubit drives, n..2n-2 couplers
    Real start = 0.0;
    Real sign = 1.0;
    GateOp gate;
    PulseParams pulse;  // library pulse with the sign applied
};

struct Schedule {
    Real t_cyc = 0.0;
    Real t_circ = 0.0;
    std::vector<ScheduledPulse> entries;
};

/// Greedy earliest-slot clocked scheduler. Every drive pulse starts at
/// k t_cyc + t_phi with the axis offset t_phi in [0, t_cyc) and a sign flip
/// absorbing the half-period parity; t_phi may go negative for the first
/// pulse on a channel. V gates start on the bare t_cyc grid, RZ pulses are
/// exempt from clock alignment.
Schedule schedule_circuit(const Circuit& c, const PulseLibrary& lib, const QubitModel& model);

/// Text format: one gate per line, e.g. "RN q=0 phi=1.5708 theta=3.1416".
Circuit parse_circuit(const std::string& text, int n_qubits);
std::string format_circuit(const Circuit& c);

}  // namespace pf
