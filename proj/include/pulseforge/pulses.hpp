#pragma once

#include <vector>

#include "pulseforge/types.hpp"

namespace pf {

enum class PulseKind { Drive, Flux };

/// Parametrized control waveform: sine-series envelope, optionally multiplied
/// by a carrier (drive pulses). The pre-shift t_d moves the support to
/// [-t_d, t_g - t_d] so the filtered signal lands in the gate window.
struct PulseParams {
    PulseKind kind = PulseKind::Drive;
    Real omega0 = 0.0;   // overall drive strength, rad/ns (flux pulses: scale 1)
    Real omega_d = 0.0;  // carrier frequency, rad/ns (0 = carrier-free)
    Real phi_d = 0.0;    // carrier phase, rad
    std::vector<Real> a = std::vector<Real>(20, 0.0);  // envelope coefficients
    Real t_g = 1.0;      // gate time, ns
    Real t_d = 0.0;      // pre-shift, ns, >= 0
    Real sign = 1.0;     // global sign flip used by the composer

    int n_max() const { return static_cast<int>(a.size()); }
    void validate() const;
    /// Coefficient bound: drive envelopes use [-1, 1], flux pulses [-pi, pi]
    /// (the flux initialization uses amplitude pi/2).
    Real amplitude_bound() const { return kind == PulseKind::Flux ? kPi : 1.0; }
};

/// Control value at time t:
///   drive: sign * Omega0 * cos(omega_d (t+t_d) + phi_d) * sum_n a_n sin(n pi (t+t_d)/t_g)
///   flux:  sign * sum_n a_n sin(n pi (t+t_d)/t_g)
/// Exactly zero for (t + t_d) outside [0, t_g].
Real eval_control(const PulseParams& p, Real t);

/// Order-m Butterworth low-pass, unit DC gain, -3 dB at delta_f.
struct FilterSpec {
    int order = 4;
    Real delta_f = 0.0;   // bandwidth, rad/ns
    Real sample_dt = 0.0; // ns; 0 = pick the default grid for the pulse

    void validate() const;
};

struct SampledSignal {
    Real t0 = 0.0;
    Real dt = 0.0;
    std::vector<Real> values;

    int size() const { return static_cast<int>(values.size()); }
    Real t_end() const { return t0 + dt * (values.empty() ? 0 : size() - 1); }
    /// Local cubic (Catmull-Rom) interpolation; zero outside the grid.
    Real eval(Real t) const;
};

/// Causal convolution with the filter response, realized as a bilinear-
/// transform IIR (frequency pre-warped at delta_f) run forward in time only.
/// Throws on sample rates below 4x the cutoff (aliasing).
SampledSignal apply_filter(const SampledSignal& signal, const FilterSpec& f);

/// Filter delay: peak of the discrete cross-correlation between input and
/// output, quadratic-interpolated to sub-sample precision, clamped to >= 0.
/// max_lag_ns bounds the search window (<= 0 searches all lags).
Real estimate_delay(const SampledSignal& input, const SampledSignal& output,
                    Real max_lag_ns = 0.0);

/// Default sampling step for a pulse: at least 64 samples per carrier period,
/// per envelope lobe of the highest harmonic, and per filter cutoff period.
Real default_sample_dt(const PulseParams& p, const FilterSpec* f);

/// Sample eval_control on a uniform grid covering [t_start, t_end].
SampledSignal sample_pulse(const PulseParams& p, Real t_start, Real t_end, Real dt);

/// Physical control signal handed to the propagator: either the analytic
/// pulse (unfiltered runs) or a sampled filtered waveform, with its compact
/// support so integration can skip quiet regions.
class ControlSignal {
public:
    ControlSignal() = default;
    static ControlSignal analytic(const PulseParams& p);
    static ControlSignal sampled(SampledSignal s);

    Real operator()(Real t) const {
        if (t < support_lo_ || t > support_hi_) return 0.0;
        return analytic_ ? eval_control(pulse_, t) : samples_.eval(t);
    }
    Real support_lo() const { return support_lo_; }
    Real support_hi() const { return support_hi_; }
    bool is_analytic() const { return analytic_; }
    const SampledSignal& samples() const { return samples_; }

private:
    bool analytic_ = true;
    PulseParams pulse_;
    SampledSignal samples_;
    Real support_lo_ = 0.0;
    Real support_hi_ = 0.0;
};

/// Result of pushing a pulse through the bandwidth model: the physical
/// signal on [-t_d, t_horizon], the raw (shifted) control on the same grid,
/// and the delay that was applied.
struct FilteredPulse {
    ControlSignal physical;
    SampledSignal control;   // shifted control samples (penalty integrals)
    SampledSignal filtered;  // filtered samples (penalty integrals)
    Real t_d = 0.0;
};

/// Build the physical signal for a pulse. Without a filter this is the
/// analytic waveform. With a filter: estimate t_d from the unshifted pulse,
/// pre-shift, filter on a grid reaching t_horizon (>= 10 t_g for the
/// long-window error), and return the sampled result.
/// envelope_only filters the envelope and re-applies the carrier afterwards.
FilteredPulse make_physical_signal(const PulseParams& p, const FilterSpec* f, Real t_horizon,
                                   bool envelope_only = false);

}  // namespace pf
