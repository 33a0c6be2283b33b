#pragma once

#include <array>
#include <vector>

#include "pulseforge/circuit_model.hpp"
#include "pulseforge/pulses.hpp"

namespace pf {

/// Time-ordered evolution operator (or its action on selected columns).
struct Propagation {
    CMatrix u;
    Real t_i = 0.0;
    Real t_f = 0.0;
    Real unitarity_defect = 0.0;  // max |U^dag U - I| over the propagated columns
};

struct ToleranceSpec {
    Real atol = 1e-10;
    Real rtol = 1e-10;
};

/// Physical drive line Omega(t) (post-filter when a filter is in play).
struct DriveChannel {
    ControlSignal signal;
};

/// Flux line Phi_c(t); the static offset Phi_s = pi + Phi_c is implicit in
/// the coupling factor E_Js cos(Phi_s / 2).
struct FluxChannel {
    ControlSignal signal;
};

/// A control line carrying several scheduled pulses: value(t) =
/// sum_k sign_k * signal_k(t - start_k). Pulses do not overlap, ring-downs may.
class PulseTrain {
public:
    void add(Real start, Real sign, ControlSignal signal);
    Real operator()(Real t) const;
    /// Union of the entries' supports, sorted.
    std::vector<std::pair<Real, Real>> support() const;
    bool empty() const { return entries_.empty(); }

private:
    struct Entry {
        Real start;
        Real sign;
        ControlSignal signal;
    };
    std::vector<Entry> entries_;
};

/// Integrate i dU/dt = H(t) U for the driven qubit in the interaction
/// picture, H_nm = Omega(t) phi_nm exp(i (w_n - w_m) t), from U(t_i) = B
/// (identity when initial == nullptr). Adaptive Dormand-Prince 5(4) with the
/// step capped at 2 pi / (20 max|w_n - w_m|).
Propagation propagate_drive(const QubitModel& model, const DriveChannel& drive, Real t_i, Real t_f,
                            const ToleranceSpec& tol = {}, const CMatrix* initial = nullptr);

/// Coupled-pair evolution under E_Js(t) cos(dphi) dressed with the pair
/// interaction-picture phases; E_Js(t) = ejs cos((pi + Phi_c(t))/2).
Propagation propagate_pair(const QubitModel& m1, const QubitModel& m2, const CouplerSpec& coupler,
                           const FluxChannel& flux, Real t_i, Real t_f,
                           const ToleranceSpec& tol = {}, const CMatrix* initial = nullptr);

/// Three-qubit chain: state-vector propagation (dimension n_keep^3) under
/// the summed drive and coupler Hamiltonians.
CVector propagate_chain(const std::array<const QubitModel*, 3>& models,
                        const std::array<CouplerSpec, 2>& couplers,
                        const std::array<const PulseTrain*, 3>& drives,
                        const std::array<const PulseTrain*, 2>& fluxes, Real t_i, Real t_f,
                        const CVector& initial, const ToleranceSpec& tol = {});

}  // namespace pf
