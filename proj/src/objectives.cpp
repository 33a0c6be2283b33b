#include "pulseforge/objectives.hpp"

#include <cmath>

namespace pf {

void GateTarget::validate() const {
    const int d = dim();
    if (d != 2 && d != 4) throw config_error("GateTarget: dimension must be 2 or 4");
    if (u_target.cols() != d) throw config_error("GateTarget: target must be square");
    if ((u_target.adjoint() * u_target - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
        throw config_error("GateTarget: target must be unitary");
    if (mode == CostMode::VPattern && d != 4)
        throw config_error("GateTarget: v_pattern mode requires d = 4");
}

CMatrix computational_selector(int model_dim, int n_qubits) {
    const int d = n_qubits == 1 ? model_dim : model_dim * model_dim;
    const int k = 1 << n_qubits;
    CMatrix p = CMatrix::Zero(d, k);
    for (int b = 0; b < k; ++b) {
        int row = 0;
        for (int q = 0; q < n_qubits; ++q) row = row * model_dim + ((b >> (n_qubits - 1 - q)) & 1);
        p(row, b) = 1.0;
    }
    return p;
}

CMatrix computational_block(const CMatrix& u, int model_dim, int n_qubits) {
    const int k = 1 << n_qubits;
    CMatrix block(k, k);
    auto row_of = [&](int b) {
        int row = 0;
        for (int q = 0; q < n_qubits; ++q) row = row * model_dim + ((b >> (n_qubits - 1 - q)) & 1);
        return row;
    };
    if (u.cols() == k) {
        for (int b = 0; b < k; ++b) block.row(b) = u.row(row_of(b));
    } else {
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < k; ++c) block(r, c) = u(row_of(r), row_of(c));
    }
    return block;
}

Real gate_error(const CMatrix& block, const GateTarget& target) {
    target.validate();
    const int d = target.dim();
    if (block.rows() < d) throw config_error("gate_error: block smaller than target");
    const Complex tr = (target.u_target.adjoint() * block).trace();
    const Real f = std::norm(tr) / (static_cast<Real>(d) * d);
    return 1.0 - f;
}

CMatrix v_matrix(Real beta, Real gamma) {
    CMatrix v = CMatrix::Zero(4, 4);
    const Real s = 1.0 / std::sqrt(2.0);
    v(0, 0) = std::polar(1.0, -(beta - gamma));
    v(1, 1) = std::polar(s, beta);
    v(2, 2) = std::polar(s, beta);
    v(1, 2) = Complex(0.0, -s) * std::polar(1.0, beta);
    v(2, 1) = v(1, 2);
    v(3, 3) = std::polar(1.0, -(beta + gamma));
    return v;
}

Real v_pattern_cost(const CMatrix& block4) {
    if (block4.rows() != 4 || block4.cols() != 4)
        throw config_error("v_pattern_cost: need a 4x4 computational block");
    static const CMatrix v0 = v_matrix(0.0, 0.0);
    const CMatrix m = v0.adjoint() * block4;
    Real s = 0.0;
    for (int i = 0; i < 4; ++i) s += std::abs(m(i, i));
    return 1.0 - s * s / 16.0;
}

VPhases extract_v_phases(const CMatrix& block4) {
    VPhases p;
    p.beta = std::arg(block4(1, 1) + block4(2, 2));
    // arg(U00) = -(beta - gamma), arg(U33) = -(beta + gamma)
    p.gamma = 0.5 * (std::arg(block4(0, 0)) - std::arg(block4(3, 3)));
    return p;
}

namespace {

Real window_integral(const SampledSignal& s, Real a, Real b) {
    if (b <= a || s.size() < 2) return 0.0;
    // trapezoid on the sample grid, clipped to [a, b]
    Real acc = 0.0;
    const int n = s.size();
    for (int i = 0; i + 1 < n; ++i) {
        const Real t0 = s.t0 + i * s.dt, t1 = t0 + s.dt;
        if (t1 <= a || t0 >= b) continue;
        const Real lo = std::max(t0, a), hi = std::min(t1, b);
        const Real v0 = std::abs(s.values[i]), v1 = std::abs(s.values[i + 1]);
        // linear interpolation of |v| at the clipped ends
        const Real f0 = v0 + (v1 - v0) * (lo - t0) / s.dt;
        const Real f1 = v0 + (v1 - v0) * (hi - t0) / s.dt;
        acc += 0.5 * (f0 + f1) * (hi - lo);
    }
    return acc;
}

Real block_cost(const CMatrix& block, const GateTarget& target) {
    return target.mode == CostMode::VPattern ? v_pattern_cost(block) : gate_error(block, target);
}

struct WindowErrors {
    Real gate = 0.0;
    Real lng = 0.0;
};

template <class Propagate>
CostBreakdown assemble_cost(const FilteredPulse& fp, const PulseParams& pulse, bool filtered,
                            const GateTarget& target, Real eta, Propagate&& propagate_block) {
    CostBreakdown out;
    const Real t_g = pulse.t_g;
    out.error_gate = block_cost(propagate_block(0.0, t_g), target);
    if (filtered) {
        out.error_long = block_cost(propagate_block(-fp.t_d, 10.0 * t_g), target);
    } else {
        out.error_long = out.error_gate;  // zero drive outside [0, t_g]
    }
    out.ef = std::max(out.error_gate, out.error_long);

    const Real body = window_integral(fp.filtered, 0.0, t_g);
    if (body <= 0.0) throw config_error("filtered_error: degenerate pulse (zero support in the gate window)");
    const Real head = window_integral(fp.filtered, -fp.t_d, 0.0);
    const Real tail = window_integral(fp.filtered, t_g, 10.0 * t_g);
    out.penalty = eta * (head + tail) / body;
    out.total = out.ef + out.penalty;
    return out;
}

}  // namespace

CostBreakdown filtered_error_1q(const QubitModel& model, const PulseParams& pulse,
                                const FilterSpec* filter, const GateTarget& target, Real eta,
                                const ToleranceSpec& tol, bool envelope_only) {
    FilteredPulse fp = make_physical_signal(pulse, filter, 10.0 * pulse.t_g, envelope_only);
    const CMatrix p = computational_selector(model.dim(), 1);
    DriveChannel ch{fp.physical};
    auto prop = [&](Real a, Real b) {
        Propagation r = propagate_drive(model, ch, a, b, tol, &p);
        return computational_block(r.u, model.dim(), 1);
    };
    return assemble_cost(fp, pulse, filter != nullptr, target, eta, prop);
}

CostBreakdown filtered_error_2q(const QubitModel& m1, const QubitModel& m2,
                                const CouplerSpec& coupler, const PulseParams& pulse,
                                const FilterSpec* filter, const GateTarget& target, Real eta,
                                const ToleranceSpec& tol, bool envelope_only) {
    FilteredPulse fp = make_physical_signal(pulse, filter, 10.0 * pulse.t_g, envelope_only);
    const CMatrix p = computational_selector(m1.dim(), 2);
    FluxChannel ch{fp.physical};
    auto prop = [&](Real a, Real b) {
        Propagation r = propagate_pair(m1, m2, coupler, ch, a, b, tol, &p);
        return computational_block(r.u, m1.dim(), 2);
    };
    return assemble_cost(fp, pulse, filter != nullptr, target, eta, prop);
}

CMatrix realized_block_1q(const QubitModel& model, const PulseParams& pulse,
                          const FilterSpec* filter, const ToleranceSpec& tol,
                          bool envelope_only) {
    FilteredPulse fp = make_physical_signal(pulse, filter, 10.0 * pulse.t_g, envelope_only);
    const CMatrix p = computational_selector(model.dim(), 1);
    DriveChannel ch{fp.physical};
    Propagation r = propagate_drive(model, ch, 0.0, pulse.t_g, tol, &p);
    return computational_block(r.u, model.dim(), 1);
}

CMatrix realized_block_2q(const QubitModel& m1, const QubitModel& m2, const CouplerSpec& coupler,
                          const PulseParams& pulse, const FilterSpec* filter,
                          const ToleranceSpec& tol, bool envelope_only) {
    FilteredPulse fp = make_physical_signal(pulse, filter, 10.0 * pulse.t_g, envelope_only);
    const CMatrix p = computational_selector(m1.dim(), 2);
    FluxChannel ch{fp.physical};
    Propagation r = propagate_pair(m1, m2, coupler, ch, 0.0, pulse.t_g, tol, &p);
    return computational_block(r.u, m1.dim(), 2);
}

}  // namespace pf
