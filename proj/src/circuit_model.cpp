#include "pulseforge/circuit_model.hpp"

#include <cmath>
#include <iostream>

namespace pf {

void CircuitSpec::validate() const {
    if (!(ec > 0.0)) throw config_error("CircuitSpec: E_C must be > 0");
    if (!(el > 0.0)) throw config_error("CircuitSpec: E_L must be > 0 (the circuit always has the inductor)");
    if (!(ej >= 0.0)) throw config_error("CircuitSpec: E_J must be >= 0");
    if (!std::isfinite(phi_e)) throw config_error("CircuitSpec: phi_e must be finite");
}

void CouplerSpec::validate() const {
    if (!(ejs >= 0.0)) throw config_error("CouplerSpec: E_Js must be >= 0");
}

namespace {

/// phi operator in the Fock basis of the LC subcircuit: phi_zpf (a + a^dag).
Matrix phi_operator(int dim, Real phi_zpf) {
    Matrix phi = Matrix::Zero(dim, dim);
    for (int n = 0; n + 1 < dim; ++n) {
        const Real v = phi_zpf * std::sqrt(Real(n + 1));
        phi(n, n + 1) = v;
        phi(n + 1, n) = v;
    }
    return phi;
}

struct TrigOps {
    Matrix cos_phi;
    Matrix sin_phi;
};

/// Exact matrix functions of the truncated phi operator via its spectral
/// decomposition (phi is real symmetric tridiagonal).
TrigOps trig_of_phi(const Matrix& phi) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(phi);
    const Vector& lam = es.eigenvalues();
    const Matrix& v = es.eigenvectors();
    Matrix cd = lam.array().cos().matrix().asDiagonal();
    Matrix sd = lam.array().sin().matrix().asDiagonal();
    TrigOps ops;
    ops.cos_phi = v * cd * v.transpose();
    ops.sin_phi = v * sd * v.transpose();
    return ops;
}

struct BareSolution {
    Vector energies;  // absolute eigenvalues, ascending
    Matrix vectors;   // columns = eigenvectors in the Fock basis
    TrigOps trig;
    Matrix phi;
};

BareSolution diagonalize_bare(const CircuitSpec& spec, int basis_dim) {
    const Real omega_lc = std::sqrt(8.0 * spec.ec * spec.el);
    const Real phi_zpf = std::pow(2.0 * spec.ec / spec.el, 0.25);

    BareSolution sol;
    sol.phi = phi_operator(basis_dim, phi_zpf);
    sol.trig = trig_of_phi(sol.phi);

    Matrix h = -spec.ej * (std::cos(spec.phi_e) * sol.trig.cos_phi -
                           std::sin(spec.phi_e) * sol.trig.sin_phi);
    for (int n = 0; n < basis_dim; ++n) h(n, n) += omega_lc * (n + 0.5);

    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw numerical_error("bare Hamiltonian diagonalization failed");
    sol.energies = es.eigenvalues();
    sol.vectors = es.eigenvectors();
    return sol;
}

void fix_phases(Matrix& vecs, const Matrix& phi, int n_keep) {
    for (int k = 0; k < n_keep; ++k) {
        for (int i = 0; i < vecs.rows(); ++i) {
            if (std::abs(vecs(i, k)) > 1e-12) {
                if (vecs(i, k) < 0.0) vecs.col(k) = -vecs.col(k);
                break;
            }
        }
    }
    if (n_keep >= 2 && vecs.col(1).dot(phi * vecs.col(0)) < 0.0) vecs.col(1) = -vecs.col(1);
}

/// Parity index of an eigenvector: Fock states alternate parity, so project
/// onto even/odd oscillator indices. Only meaningful at sweet spots.
Real parity_of(const Eigen::Ref<const Vector>& v) {
    Real even = 0.0, odd = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        if (i % 2 == 0)
            even += v(i) * v(i);
        else
            odd += v(i) * v(i);
    }
    return even >= odd ? 1.0 : -1.0;
}

}  // namespace

QubitModel build_qubit_model(const CircuitSpec& spec, int basis_dim, int n_keep,
                             bool check_convergence) {
    spec.validate();
    if (basis_dim < 40) throw config_error("build_qubit_model: basis_dim must be >= 40");
    if (n_keep < 2 || n_keep > basis_dim / 3)
        throw config_error("build_qubit_model: need 2 <= n_keep <= basis_dim/3");

    BareSolution sol = diagonalize_bare(spec, basis_dim);

    if (check_convergence) {
        const int bigger = (basis_dim * 5 + 3) / 4;
        BareSolution ref = diagonalize_bare(spec, bigger);
        const Real spread = sol.energies(n_keep - 1) - sol.energies(0);
        for (int n = 0; n < n_keep; ++n) {
            const Real shift = std::abs(sol.energies(n) - ref.energies(n));
            if (shift > 1e-8 * spread)
                throw numerical_error("build_qubit_model: level " + std::to_string(n) +
                                      " shifted by " + std::to_string(shift / spread) +
                                      " (relative) under a 25% larger basis; increase basis_dim");
        }
    }

    Matrix kept = sol.vectors.leftCols(n_keep);
    fix_phases(kept, sol.phi, n_keep);

    QubitModel m;
    m.omega = sol.energies.head(n_keep).array() - sol.energies(0);
    m.phi_mat = kept.transpose() * sol.phi * kept;
    m.cos_mat = kept.transpose() * sol.trig.cos_phi * kept;
    m.sin_mat = kept.transpose() * sol.trig.sin_phi * kept;
    m.parity = Vector(n_keep);
    for (int k = 0; k < n_keep; ++k) m.parity(k) = parity_of(kept.col(k));
    m.omega10 = m.omega(1);
    if (!(m.omega10 > 0.0)) throw numerical_error("build_qubit_model: degenerate omega10");
    m.alpha_r = (m.omega(2) - m.omega(1)) / m.omega10 - 1.0;
    m.varphi10 = std::abs(m.phi_mat(1, 0));
    m.spec = spec;
    m.n_keep = n_keep;
    m.basis_dim = basis_dim;
    return m;
}

CircuitSpec calibrate_scale(const CircuitRatios& ratios, Real target_omega10, int basis_dim,
                            int n_keep) {
    if (!(target_omega10 > 0.0)) throw config_error("calibrate_scale: target omega10 must be > 0");
    CircuitSpec spec;
    spec.ec = 1.0;
    spec.ej = ratios.ej_over_ec;
    spec.el = ratios.el_over_ec;
    spec.phi_e = ratios.phi_e;
    spec.validate();

    QubitModel probe = build_qubit_model(spec, basis_dim, n_keep, false);
    if (!(probe.omega10 > 0.0)) throw numerical_error("calibrate_scale: degenerate omega10");
    const Real scale = target_omega10 / probe.omega10;
    spec.ec *= scale;
    spec.el *= scale;
    spec.ej *= scale;

    QubitModel check = build_qubit_model(spec, basis_dim, n_keep, false);
    if (std::abs(check.omega10 - target_omega10) > 1e-9 * target_omega10)
        throw numerical_error("calibrate_scale: verification diagonalization missed the target");
    return spec;
}

CouplingParams coupling_params(const QubitModel& model) {
    const Real mod = std::fmod(std::abs(model.spec.phi_e), kPi);
    if (std::min(mod, kPi - mod) > 1e-9)
        std::cerr << "warning: coupling_params called away from a flux sweet spot (phi_e = "
                  << model.spec.phi_e << "); projection computed anyway\n";
    CouplingParams p;
    const Real c00 = model.cos_mat(0, 0);
    const Real c11 = model.cos_mat(1, 1);
    p.g1 = 0.5 * (c00 + c11);
    p.gz = 0.5 * (c11 - c00);
    p.gx = model.sin_mat(0, 1);
    return p;
}

Real effective_nonlinearity(const CircuitSpec& spec, const CouplerSpec& coupler, Real phi_s,
                            int basis_dim) {
    spec.validate();
    coupler.validate();
    BareSolution sol = diagonalize_bare(spec, basis_dim);
    Matrix h = -spec.ej * (std::cos(spec.phi_e) * sol.trig.cos_phi -
                           std::sin(spec.phi_e) * sol.trig.sin_phi);
    h += coupler.ejs * std::cos(phi_s / 2.0) * sol.trig.cos_phi;
    const Real omega_lc = std::sqrt(8.0 * spec.ec * spec.el);
    for (int n = 0; n < basis_dim; ++n) h(n, n) += omega_lc * (n + 0.5);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw numerical_error("effective_nonlinearity: diagonalization failed");
    const Vector& e = es.eigenvalues();
    return (e(2) - e(1)) - (e(1) - e(0));
}

CircuitSpec family_spec_for_alpha(Real alpha_r_target, Real target_omega10, Real ej_over_ec,
                                  int basis_dim, int n_keep) {
    if (alpha_r_target == 0.0)
        throw config_error("family_spec_for_alpha: alpha_r = 0 is the harmonic limit (E_J = 0), not a family member");
    const Real phi_e = alpha_r_target > 0.0 ? kPi : 0.0;

    auto alpha_at = [&](Real log_el) {
        CircuitSpec s;
        s.ec = 1.0;
        s.ej = ej_over_ec;
        s.el = std::exp(log_el);
        s.phi_e = phi_e;
        return build_qubit_model(s, basis_dim, n_keep, false).alpha_r;
    };

    // |alpha_r| decreases toward the harmonic limit as E_L/E_C grows; scan a
    // log grid to bracket the target, then bisect.
    const Real target = alpha_r_target;
    auto miss = [&](Real log_el) { return alpha_at(log_el) - target; };

    Real lo = std::log(1e-3), hi = std::log(1e4);
    Real flo = miss(lo), fhi = miss(hi);
    if (flo * fhi > 0.0) {
        bool bracketed = false;
        Real prev = lo, fprev = flo;
        for (int i = 1; i <= 40 && !bracketed; ++i) {
            const Real x = lo + (hi - lo) * i / 40.0;
            const Real fx = miss(x);
            if (fprev * fx <= 0.0) {
                lo = prev;
                flo = fprev;
                hi = x;
                fhi = fx;
                bracketed = true;
            }
            prev = x;
            fprev = fx;
        }
        if (!bracketed)
            throw config_error("family_spec_for_alpha: alpha_r = " + std::to_string(target) +
                               " unreachable with E_J/E_C = " + std::to_string(ej_over_ec));
    }

    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const Real mid = 0.5 * (lo + hi);
        const Real fm = miss(mid);
        if (flo * fm <= 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }

    CircuitRatios ratios;
    ratios.ej_over_ec = ej_over_ec;
    ratios.el_over_ec = std::exp(0.5 * (lo + hi));
    ratios.phi_e = phi_e;
    return calibrate_scale(ratios, target_omega10, basis_dim, n_keep);
}

}  // namespace pf
