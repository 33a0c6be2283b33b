#include "pulseforge/propagator.hpp"

#include <algorithm>
#include <cmath>

namespace pf {

void PulseTrain::add(Real start, Real sign, ControlSignal signal) {
    entries_.push_back({start, sign, std::move(signal)});
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.start < b.start; });
}

Real PulseTrain::operator()(Real t) const {
    Real v = 0.0;
    for (const Entry& e : entries_) {
        const Real u = t - e.start;
        if (u >= e.signal.support_lo() && u <= e.signal.support_hi()) v += e.sign * e.signal(u);
    }
    return v;
}

std::vector<std::pair<Real, Real>> PulseTrain::support() const {
    std::vector<std::pair<Real, Real>> iv;
    for (const Entry& e : entries_)
        iv.emplace_back(e.start + e.signal.support_lo(), e.start + e.signal.support_hi());
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<Real, Real>> merged;
    for (auto& p : iv) {
        if (!merged.empty() && p.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, p.second);
        else
            merged.push_back(p);
    }
    return merged;
}

namespace {

constexpr Complex kI{0.0, 1.0};

// Dormand-Prince 5(4) tableau.
constexpr Real c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr Real a21 = 1.0 / 5;
constexpr Real a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
               a54 = -212.0 / 729;
constexpr Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
               a65 = -5103.0 / 18656;
constexpr Real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
               b6 = 11.0 / 84;
constexpr Real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
               e6 = 22.0 / 525, e7 = -1.0 / 40;

/// Adaptive embedded RK over [t0, t1]; y advanced in place. The right-hand
/// side must be smooth inside the interval (callers split at support edges).
template <class Rhs>
void integrate_dopri5(Rhs&& rhs, CMatrix& y, Real t0, Real t1, const ToleranceSpec& tol,
                      Real max_dt) {
    if (t1 <= t0) return;
    CMatrix k1(y.rows(), y.cols()), k2(y.rows(), y.cols()), k3(y.rows(), y.cols()),
        k4(y.rows(), y.cols()), k5(y.rows(), y.cols()), k6(y.rows(), y.cols()),
        k7(y.rows(), y.cols()), ytmp(y.rows(), y.cols()), ynew(y.rows(), y.cols());

    Real t = t0;
    Real h = std::min(max_dt, t1 - t0);
    rhs(t, y, k1);
    bool fsal_valid = true;

    const Real hmin = std::max(1e-14, 1e-13 * (t1 - t0));
    while (t < t1) {
        h = std::min(h, t1 - t);
        if (!fsal_valid) {
            rhs(t, y, k1);
            fsal_valid = true;
        }

        ytmp.noalias() = y + h * a21 * k1;
        rhs(t + c2 * h, ytmp, k2);
        ytmp.noalias() = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp.noalias() = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp.noalias() = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp.noalias() = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew.noalias() = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);

        // scaled max-norm of the embedded error estimate
        Real err = 0.0;
        for (Eigen::Index j = 0; j < y.cols(); ++j)
            for (Eigen::Index i = 0; i < y.rows(); ++i) {
                const Complex de = e1 * k1(i, j) + e3 * k3(i, j) + e4 * k4(i, j) +
                                   e5 * k5(i, j) + e6 * k6(i, j) + e7 * k7(i, j);
                const Real scale =
                    tol.atol + tol.rtol * std::max(std::abs(y(i, j)), std::abs(ynew(i, j)));
                err = std::max(err, h * std::abs(de) / scale);
            }

        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            const Real fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
            h = std::min(h, max_dt);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            fsal_valid = true;  // k1 still matches (t, y)
        }
        if (h < hmin)
            throw numerical_error("integrate_dopri5: step size underflow at t = " +
                                  std::to_string(t) + " (err = " + std::to_string(err) + ")");
    }
}

/// Integrate only where the control has support; the interaction-picture
/// Hamiltonian vanishes with the control, so U is constant elsewhere.
template <class Rhs>
void integrate_windowed(Rhs&& rhs, CMatrix& y, Real t_i, Real t_f,
                        const std::vector<std::pair<Real, Real>>& support,
                        const ToleranceSpec& tol, Real max_dt) {
    for (const auto& [lo, hi] : support) {
        const Real a = std::max(t_i, lo);
        const Real b = std::min(t_f, hi);
        if (b > a) integrate_dopri5(rhs, y, a, b, tol, max_dt);
    }
}

Real unitarity_defect_of(const CMatrix& u) {
    CMatrix g = u.adjoint() * u;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

/// Single-qubit interaction-picture right-hand side with preallocated
/// workspace: dU = -i Omega(t) D(t) phi D(t)^dag U.
class DriveRhs {
public:
    DriveRhs(const QubitModel& m, const ControlSignal& drive)
        : omega_(m.omega), phi_(m.phi_mat), drive_(drive) {
        const auto d = phi_.rows();
        ph_.resize(d);
        wr_.resize(d, 1);
        wi_.resize(d, 1);
        gr_.resize(d, 1);
        gi_.resize(d, 1);
    }

    void operator()(Real t, const CMatrix& y, CMatrix& dy) {
        const Real om = drive_(t);
        if (om == 0.0) {
            dy.setZero();
            return;
        }
        const auto d = phi_.rows();
        const auto k = y.cols();
        if (wr_.cols() != k) {
            wr_.resize(d, k);
            wi_.resize(d, k);
            gr_.resize(d, k);
            gi_.resize(d, k);
        }
        for (Eigen::Index n = 0; n < d; ++n) ph_(n) = std::polar(1.0, omega_(n) * t);
        for (Eigen::Index j = 0; j < k; ++j)
            for (Eigen::Index n = 0; n < d; ++n) {
                const Complex w = std::conj(ph_(n)) * y(n, j);
                wr_(n, j) = w.real();
                wi_(n, j) = w.imag();
            }
        gr_.noalias() = phi_ * wr_;
        gi_.noalias() = phi_ * wi_;
        for (Eigen::Index j = 0; j < k; ++j)
            for (Eigen::Index n = 0; n < d; ++n)
                dy(n, j) = -kI * om * (ph_(n) * Complex(gr_(n, j), gi_(n, j)));
    }

private:
    const Vector& omega_;
    const Matrix& phi_;
    const ControlSignal& drive_;
    CVector ph_;
    Matrix wr_, wi_, gr_, gi_;
};

/// Coupled-pair right-hand side: dU = -i J(t) D2 K D2^dag U with
/// K = cos x cos + sin x sin and J(t) = ejs cos((pi + Phi_c)/2).
class PairRhs {
public:
    PairRhs(const QubitModel& m1, const QubitModel& m2, Real ejs, const ControlSignal& flux)
        : ejs_(ejs), flux_(flux) {
        const int d1 = m1.dim(), d2 = m2.dim();
        dim_ = d1 * d2;
        k_.resize(dim_, dim_);
        for (int n1 = 0; n1 < d1; ++n1)
            for (int n2 = 0; n2 < d2; ++n2)
                for (int m1i = 0; m1i < d1; ++m1i)
                    for (int m2i = 0; m2i < d2; ++m2i)
                        k_(n1 * d2 + n2, m1i * d2 + m2i) =
                            m1.cos_mat(n1, m1i) * m2.cos_mat(n2, m2i) +
                            m1.sin_mat(n1, m1i) * m2.sin_mat(n2, m2i);
        omega_.resize(dim_);
        for (int n1 = 0; n1 < d1; ++n1)
            for (int n2 = 0; n2 < d2; ++n2) omega_(n1 * d2 + n2) = m1.omega(n1) + m2.omega(n2);
        ph_.resize(dim_);
    }

    void operator()(Real t, const CMatrix& y, CMatrix& dy) {
        const Real j_t = ejs_ * std::cos((kPi + flux_(t)) / 2.0);
        if (j_t == 0.0) {
            dy.setZero();
            return;
        }
        const auto k = y.cols();
        if (wr_.cols() != k || wr_.rows() != dim_) {
            wr_.resize(dim_, k);
            wi_.resize(dim_, k);
            gr_.resize(dim_, k);
            gi_.resize(dim_, k);
        }
        for (int n = 0; n < dim_; ++n) ph_(n) = std::polar(1.0, omega_(n) * t);
        for (Eigen::Index jc = 0; jc < k; ++jc)
            for (int n = 0; n < dim_; ++n) {
                const Complex w = std::conj(ph_(n)) * y(n, jc);
                wr_(n, jc) = w.real();
                wi_(n, jc) = w.imag();
            }
        gr_.noalias() = k_ * wr_;
        gi_.noalias() = k_ * wi_;
        for (Eigen::Index jc = 0; jc < k; ++jc)
            for (int n = 0; n < dim_; ++n)
                dy(n, jc) = -kI * j_t * (ph_(n) * Complex(gr_(n, jc), gi_(n, jc)));
    }

    const Matrix& coupling_matrix() const { return k_; }

private:
    Real ejs_;
    const ControlSignal& flux_;
    int dim_;
    Matrix k_;
    Vector omega_;
    CVector ph_;
    Matrix wr_, wi_, gr_, gi_;
};

std::vector<std::pair<Real, Real>> single_interval(const ControlSignal& s) {
    return {{s.support_lo(), s.support_hi()}};
}

}  // namespace

Propagation propagate_drive(const QubitModel& model, const DriveChannel& drive, Real t_i, Real t_f,
                            const ToleranceSpec& tol, const CMatrix* initial) {
    if (!(t_f >= t_i) || !std::isfinite(t_i) || !std::isfinite(t_f))
        throw config_error("propagate_drive: bad interval");
    const int d = model.dim();
    Propagation out;
    out.t_i = t_i;
    out.t_f = t_f;
    out.u = initial ? *initial : CMatrix::Identity(d, d);
    if (initial && initial->rows() != d) throw config_error("propagate_drive: initial matrix has wrong dimension");

    DriveRhs rhs(model, drive.signal);
    const Real max_dt = kTwoPi / (20.0 * model.max_transition());
    integrate_windowed(rhs, out.u, t_i, t_f, single_interval(drive.signal), tol, max_dt);
    out.unitarity_defect = unitarity_defect_of(out.u);
    return out;
}

Propagation propagate_pair(const QubitModel& m1, const QubitModel& m2, const CouplerSpec& coupler,
                           const FluxChannel& flux, Real t_i, Real t_f, const ToleranceSpec& tol,
                           const CMatrix* initial) {
    if (!(t_f >= t_i) || !std::isfinite(t_i) || !std::isfinite(t_f))
        throw config_error("propagate_pair: bad interval");
    coupler.validate();
    const int d = m1.dim() * m2.dim();
    Propagation out;
    out.t_i = t_i;
    out.t_f = t_f;
    out.u = initial ? *initial : CMatrix::Identity(d, d);
    if (initial && initial->rows() != d) throw config_error("propagate_pair: initial matrix has wrong dimension");

    PairRhs rhs(m1, m2, coupler.ejs, flux.signal);
    const Real max_dt = kTwoPi / (20.0 * (m1.max_transition() + m2.max_transition()));
    integrate_windowed(rhs, out.u, t_i, t_f, single_interval(flux.signal), tol, max_dt);
    out.unitarity_defect = unitarity_defect_of(out.u);
    return out;
}

namespace {

/// Summed chain Hamiltonian applied to a state vector laid out as
/// psi[(n1 d2 + n2) d3 + n3].
class ChainRhs {
public:
    ChainRhs(const std::array<const QubitModel*, 3>& models,
             const std::array<CouplerSpec, 2>& couplers,
             const std::array<const PulseTrain*, 3>& drives,
             const std::array<const PulseTrain*, 2>& fluxes)
        : models_(models), drives_(drives), fluxes_(fluxes) {
        d_ = models[0]->dim();
        for (const auto* m : models)
            if (m->dim() != d_) throw config_error("propagate_chain: models must share n_keep");
        dim_ = d_ * d_ * d_;
        for (int q = 0; q < 3; ++q) ph_[q].resize(d_);
        dressed_.resize(d_, d_);
        for (int p = 0; p < 2; ++p) {
            ejs_[p] = couplers[p].ejs;
            const QubitModel& a = *models[p];
            const QubitModel& b = *models[p + 1];
            kpair_[p].resize(d_ * d_, d_ * d_);
            for (int n1 = 0; n1 < d_; ++n1)
                for (int n2 = 0; n2 < d_; ++n2)
                    for (int m1i = 0; m1i < d_; ++m1i)
                        for (int m2i = 0; m2i < d_; ++m2i)
                            kpair_[p](n1 * d_ + n2, m1i * d_ + m2i) =
                                a.cos_mat(n1, m1i) * b.cos_mat(n2, m2i) +
                                a.sin_mat(n1, m1i) * b.sin_mat(n2, m2i);
        }
        w_.resize(dim_);
        g_.resize(dim_);
    }

    void operator()(Real t, const CMatrix& y, CMatrix& dy) {
        for (int q = 0; q < 3; ++q)
            for (int n = 0; n < d_; ++n) ph_[q](n) = std::polar(1.0, models_[q]->omega(n) * t);
        dy.setZero();
        const Eigen::Map<const CVector> psi(y.data(), dim_);
        Eigen::Map<CVector> out(dy.data(), dim_);

        for (int q = 0; q < 3; ++q) {
            const Real om = drives_[q] ? (*drives_[q])(t) : 0.0;
            if (om == 0.0) continue;
            const Matrix& phi = models_[q]->phi_mat;
            for (int n = 0; n < d_; ++n)
                for (int m = 0; m < d_; ++m)
                    dressed_(n, m) = om * phi(n, m) * ph_[q](n) * std::conj(ph_[q](m));
            apply_axis(q, dressed_, psi, out);
        }
        for (int p = 0; p < 2; ++p) {
            const Real j_t = fluxes_[p] ? ejs_[p] * std::cos((kPi + (*fluxes_[p])(t)) / 2.0) : 0.0;
            if (j_t == 0.0) continue;
            apply_pair(p, j_t, psi, out);
        }
        out *= -kI;
    }

private:
    using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    void apply_axis(int q, const CMatrix& op, const Eigen::Map<const CVector>& psi,
                    Eigen::Map<CVector>& out) {
        if (q == 0) {
            Eigen::Map<const RowMat> m(psi.data(), d_, d_ * d_);
            Eigen::Map<RowMat> o(w_.data(), d_, d_ * d_);
            o.noalias() = op * m;
        } else if (q == 2) {
            Eigen::Map<const RowMat> m(psi.data(), d_ * d_, d_);
            Eigen::Map<RowMat> o(w_.data(), d_ * d_, d_);
            o.noalias() = m * op.transpose();
        } else {
            for (int n1 = 0; n1 < d_; ++n1) {
                Eigen::Map<const RowMat> m(psi.data() + n1 * d_ * d_, d_, d_);
                Eigen::Map<RowMat> o(w_.data() + n1 * d_ * d_, d_, d_);
                o.noalias() = op * m;
            }
        }
        out += w_;
    }

    void apply_pair(int p, Real j_t, const Eigen::Map<const CVector>& psi,
                    Eigen::Map<CVector>& out) {
        const int dd = d_ * d_;
        const int qa = p, qb = p + 1;
        if (p == 0) {
            // pair phases on (n1, n2); qubit 3 is the trailing index
            for (int r = 0; r < dd; ++r) {
                const Complex ph = std::conj(ph_[qa](r / d_) * ph_[qb](r % d_));
                for (int c = 0; c < d_; ++c) w_(r * d_ + c) = ph * psi(r * d_ + c);
            }
            Eigen::Map<const RowMat> m(w_.data(), dd, d_);
            Eigen::Map<RowMat> o(g_.data(), dd, d_);
            o.noalias() = kpair_[0] * m;
            for (int r = 0; r < dd; ++r) {
                const Complex ph = j_t * ph_[qa](r / d_) * ph_[qb](r % d_);
                for (int c = 0; c < d_; ++c) out(r * d_ + c) += ph * g_(r * d_ + c);
            }
        } else {
            // pair acts on (n2, n3); blocks over n1 are contiguous
            for (int n1 = 0; n1 < d_; ++n1)
                for (int r = 0; r < dd; ++r)
                    w_(n1 * dd + r) =
                        std::conj(ph_[qa](r / d_) * ph_[qb](r % d_)) * psi(n1 * dd + r);
            Eigen::Map<const CMatrix> m(w_.data(), dd, d_);
            Eigen::Map<CMatrix> o(g_.data(), dd, d_);
            o.noalias() = kpair_[1] * m;
            for (int n1 = 0; n1 < d_; ++n1)
                for (int r = 0; r < dd; ++r)
                    out(n1 * dd + r) += j_t * ph_[qa](r / d_) * ph_[qb](r % d_) * g_(n1 * dd + r);
        }
    }

    std::array<const QubitModel*, 3> models_;
    std::array<const PulseTrain*, 3> drives_;
    std::array<const PulseTrain*, 2> fluxes_;
    int d_ = 0, dim_ = 0;
    std::array<Real, 2> ejs_{};
    std::array<Matrix, 2> kpair_;
    std::array<CVector, 3> ph_;
    CMatrix dressed_;
    CVector w_, g_;
};

}  // namespace

CVector propagate_chain(const std::array<const QubitModel*, 3>& models,
                        const std::array<CouplerSpec, 2>& couplers,
                        const std::array<const PulseTrain*, 3>& drives,
                        const std::array<const PulseTrain*, 2>& fluxes, Real t_i, Real t_f,
                        const CVector& initial, const ToleranceSpec& tol) {
    const int d = models[0]->dim();
    const int dim = d * d * d;
    if (initial.size() != dim) throw config_error("propagate_chain: initial state has wrong dimension");
    if (std::abs(initial.norm() - 1.0) > 1e-9)
        throw config_error("propagate_chain: initial state must be normalized");

    // merged support of every channel
    std::vector<std::pair<Real, Real>> iv;
    auto collect = [&](const PulseTrain* tr) {
        if (!tr) return;
        for (auto& p : tr->support()) iv.push_back(p);
    };
    for (auto* d3 : drives) collect(d3);
    for (auto* f2 : fluxes) collect(f2);
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<Real, Real>> merged;
    for (auto& p : iv) {
        if (!merged.empty() && p.first <= merged.back().second)
            merged.back().second = std::max(merged.back().second, p.second);
        else
            merged.push_back(p);
    }

    ChainRhs rhs(models, couplers, drives, fluxes);
    Real max_tr = 0.0;
    for (int p = 0; p < 2; ++p)
        max_tr = std::max(max_tr, models[p]->max_transition() + models[p + 1]->max_transition());
    const Real max_dt = kTwoPi / (20.0 * max_tr);

    CMatrix psi = initial;
    integrate_windowed(rhs, psi, t_i, t_f, merged, tol, max_dt);

    const Real norm = psi.norm();
    if (std::abs(norm - 1.0) > 1e-8)
        throw numerical_error("propagate_chain: norm drifted to " + std::to_string(norm));
    return CVector(Eigen::Map<CVector>(psi.data(), dim));
}

}  // namespace pf
