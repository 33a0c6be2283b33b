#include "pulseforge/pulses.hpp"

#include <algorithm>
#include <cmath>

namespace pf {

void PulseParams::validate() const {
    if (!(t_g > 0.0)) throw config_error("PulseParams: t_g must be > 0");
    if (!(t_d >= 0.0)) throw config_error("PulseParams: t_d must be >= 0");
    if (a.empty()) throw config_error("PulseParams: empty envelope");
    const Real bound = amplitude_bound();
    for (Real an : a)
        if (!(std::abs(an) <= bound + 1e-12))
            throw config_error("PulseParams: envelope coefficient out of bounds");
    if (sign != 1.0 && sign != -1.0) throw config_error("PulseParams: sign must be +-1");
}

Real eval_control(const PulseParams& p, Real t) {
    const Real u = t + p.t_d;
    if (u < 0.0 || u > p.t_g) return 0.0;
    Real env = 0.0;
    const Real w = kPi * u / p.t_g;
    for (int n = 0; n < p.n_max(); ++n)
        if (p.a[n] != 0.0) env += p.a[n] * std::sin((n + 1) * w);
    if (p.kind == PulseKind::Drive)
        return p.sign * p.omega0 * std::cos(p.omega_d * u + p.phi_d) * env;
    return p.sign * env;
}

void FilterSpec::validate() const {
    if (order < 1) throw config_error("FilterSpec: order must be >= 1");
    if (!(delta_f > 0.0)) throw config_error("FilterSpec: bandwidth must be > 0");
}

Real SampledSignal::eval(Real t) const {
    const int n = size();
    if (n == 0 || t < t0 || t > t_end()) return 0.0;
    if (n == 1) return values[0];
    Real x = (t - t0) / dt;
    int i = static_cast<int>(std::floor(x));
    i = std::clamp(i, 0, n - 2);
    const Real u = x - i;
    auto at = [&](int k) { return values[std::clamp(k, 0, n - 1)]; };
    const Real p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return 0.5 * (2.0 * p1 + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

namespace {

struct Biquad {
    Real b0 = 0, b1 = 0, b2 = 0, a1 = 0, a2 = 0;  // a0 normalized to 1
};

/// Bilinear-transform sections of the analog Butterworth prototype with the
/// cutoff pre-warped so the digital -3 dB point lands at delta_f.
std::vector<Biquad> design_butterworth(int m, Real delta_f, Real dt) {
    const Real wc = 2.0 / dt * std::tan(delta_f * dt / 2.0);
    const Real K = 2.0 / dt;
    std::vector<Biquad> sections;
    for (int k = 1; 2 * k <= m; ++k) {
        // conjugate pole pair exp(+-i pi (2k + m - 1)/(2m)) scaled by wc
        const Real theta = kPi * (2.0 * k + m - 1.0) / (2.0 * m);
        const Real a1a = -2.0 * std::cos(theta) * wc;  // -2 Re(p) wc > 0
        const Real a0a = wc * wc;
        const Real d = K * K + a1a * K + a0a;
        Biquad s;
        s.b0 = a0a / d;
        s.b1 = 2.0 * a0a / d;
        s.b2 = a0a / d;
        s.a1 = (2.0 * a0a - 2.0 * K * K) / d;
        s.a2 = (K * K - a1a * K + a0a) / d;
        sections.push_back(s);
    }
    if (m % 2 == 1) {
        const Real d = K + wc;
        Biquad s;
        s.b0 = wc / d;
        s.b1 = wc / d;
        s.a1 = (wc - K) / d;
        sections.push_back(s);
    }
    return sections;
}

}  // namespace

SampledSignal apply_filter(const SampledSignal& signal, const FilterSpec& f) {
    f.validate();
    if (!(signal.dt > 0.0)) throw config_error("apply_filter: signal dt must be > 0");
    if (1.0 / signal.dt < 4.0 * f.delta_f / kTwoPi)
        throw config_error("apply_filter: sample rate below 4x the filter cutoff (aliasing)");

    const auto sections = design_butterworth(f.order, f.delta_f, signal.dt);
    SampledSignal out = signal;
    for (const Biquad& s : sections) {
        Real z1 = 0.0, z2 = 0.0;  // direct form II transposed
        for (Real& v : out.values) {
            const Real x = v;
            const Real y = s.b0 * x + z1;
            z1 = s.b1 * x - s.a1 * y + z2;
            z2 = s.b2 * x - s.a2 * y;
            v = y;
        }
    }
    return out;
}

Real estimate_delay(const SampledSignal& input, const SampledSignal& output, Real max_lag_ns) {
    if (input.values.empty() || output.values.empty())
        throw config_error("estimate_delay: empty signal");
    if (std::abs(input.dt - output.dt) > 1e-12 * input.dt)
        throw config_error("estimate_delay: signals must share the sample step");
    auto all_zero = [](const SampledSignal& s) {
        for (Real v : s.values)
            if (v != 0.0) return false;
        return true;
    };
    if (all_zero(input) || all_zero(output)) throw config_error("estimate_delay: all-zero signal");

    const int ni = input.size(), no = output.size();
    const Real dt = input.dt;
    int lag_lo = -(ni - 1), lag_hi = no - 1;
    if (max_lag_ns > 0.0) {
        const int w = static_cast<int>(std::ceil(max_lag_ns / dt));
        lag_lo = std::max(lag_lo, -w);
        lag_hi = std::min(lag_hi, w);
    }

    // c(k) = sum_i in[i] out[i + k]; peak at the delay in samples.
    auto corr = [&](int k) {
        const int i0 = std::max(0, -k);
        const int i1 = std::min(ni, no - k);
        Real c = 0.0;
        for (int i = i0; i < i1; ++i) c += input.values[i] * output.values[i + k];
        return c;
    };

    int best_k = lag_lo;
    Real best_c = -std::numeric_limits<Real>::infinity();
    for (int k = lag_lo; k <= lag_hi; ++k) {
        const Real c = corr(k);
        if (c > best_c) {
            best_c = c;
            best_k = k;
        }
    }

    Real refined = best_k;
    if (best_k > lag_lo && best_k < lag_hi) {
        const Real cm = corr(best_k - 1), c0 = best_c, cp = corr(best_k + 1);
        const Real denom = cm - 2.0 * c0 + cp;
        if (std::abs(denom) > 1e-300) refined += 0.5 * (cm - cp) / denom;
    }

    const Real t_d = refined * dt + (output.t0 - input.t0);
    return std::max(0.0, t_d);
}

Real default_sample_dt(const PulseParams& p, const FilterSpec* f) {
    Real f_max = p.n_max() / (2.0 * p.t_g);  // highest envelope harmonic, GHz
    if (p.kind == PulseKind::Drive) f_max = std::max(f_max, p.omega_d / kTwoPi);
    if (f) f_max = std::max(f_max, f->delta_f / kTwoPi);
    return 1.0 / (64.0 * f_max);
}

SampledSignal sample_pulse(const PulseParams& p, Real t_start, Real t_end, Real dt) {
    SampledSignal s;
    s.t0 = t_start;
    s.dt = dt;
    const int n = static_cast<int>(std::ceil((t_end - t_start) / dt)) + 1;
    s.values.resize(std::max(n, 2));
    for (int i = 0; i < s.size(); ++i) s.values[i] = eval_control(p, t_start + i * dt);
    return s;
}

ControlSignal ControlSignal::analytic(const PulseParams& p) {
    ControlSignal c;
    c.analytic_ = true;
    c.pulse_ = p;
    c.support_lo_ = -p.t_d;
    c.support_hi_ = p.t_g - p.t_d;
    return c;
}

ControlSignal ControlSignal::sampled(SampledSignal s) {
    ControlSignal c;
    c.analytic_ = false;
    Real peak = 0.0;
    for (Real v : s.values) peak = std::max(peak, std::abs(v));
    int first = 0, last = s.size() - 1;
    if (peak > 0.0) {
        const Real eps = 1e-13 * peak;
        while (first < s.size() && std::abs(s.values[first]) <= eps) ++first;
        while (last > first && std::abs(s.values[last]) <= eps) --last;
    }
    c.support_lo_ = s.t0 + s.dt * std::max(0, first - 2);
    c.support_hi_ = s.t0 + s.dt * std::min(s.size() - 1, last + 2);
    c.samples_ = std::move(s);
    return c;
}

FilteredPulse make_physical_signal(const PulseParams& p, const FilterSpec* f, Real t_horizon,
                                   bool envelope_only) {
    p.validate();
    FilteredPulse out;
    if (!f) {
        out.physical = ControlSignal::analytic(p);
        const Real dt = default_sample_dt(p, nullptr);
        out.control = sample_pulse(p, -p.t_d, std::max(t_horizon, p.t_g - p.t_d), dt);
        out.filtered = out.control;
        out.t_d = p.t_d;
        return out;
    }
    f->validate();
    const Real dt = f->sample_dt > 0.0 ? f->sample_dt : default_sample_dt(p, f);

    PulseParams env = p;
    if (envelope_only) env.kind = PulseKind::Flux;  // strip the carrier

    // Pass 1: delay of the unshifted pulse through the filter.
    PulseParams raw = envelope_only ? env : p;
    raw.t_d = 0.0;
    SampledSignal x0 = sample_pulse(raw, 0.0, p.t_g + 40.0 / f->delta_f, dt);
    SampledSignal y0 = apply_filter(x0, *f);
    const Real max_lag = (10.0 + 2.0 * kTwoPi) / f->delta_f;
    out.t_d = estimate_delay(x0, y0, std::max(max_lag, 20 * dt));

    // Pass 2: pre-shifted control, filtered out to the long-window horizon.
    PulseParams shifted = envelope_only ? env : p;
    shifted.t_d = out.t_d;
    const Real t_end = std::max(t_horizon, p.t_g);
    out.control = sample_pulse(shifted, -out.t_d, t_end, dt);
    out.filtered = apply_filter(out.control, *f);

    if (envelope_only && p.kind == PulseKind::Drive) {
        // Carrier untouched by the bandwidth model; re-applied to the
        // filtered envelope with the same shifted time argument.
        for (int i = 0; i < out.filtered.size(); ++i) {
            const Real t = out.filtered.t0 + i * out.filtered.dt;
            const Real carrier = std::cos(p.omega_d * (t + out.t_d) + p.phi_d);
            out.filtered.values[i] *= p.omega0 * carrier;
            out.control.values[i] *= p.omega0 * carrier;
        }
    }
    out.physical = ControlSignal::sampled(out.filtered);
    return out;
}

}  // namespace pf
