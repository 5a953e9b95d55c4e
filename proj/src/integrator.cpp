#include "sapsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sapsim {

namespace {

const double kGamma = 2.0 - std::sqrt(2.0);
const double kD = kGamma / 2.0;                       // diagonal coefficient
const double kB1 = std::sqrt(2.0) / 4.0;              // BDF2 stage weights
const double kB2 = std::sqrt(2.0) / 4.0;
const double kB3 = kD;
const double kBh1 = (1.0 - std::sqrt(2.0) / 4.0) / 3.0;   // embedded 3rd-order weights
const double kBh2 = (3.0 * std::sqrt(2.0) / 4.0 + 1.0) / 3.0;
const double kBh3 = kGamma / 6.0;

} // namespace

void lu_factor(std::vector<double>& a, std::vector<int>& piv, int n) {
    piv.resize(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(a[k * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(a[i * n + k]);
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) throw std::runtime_error("integrator: singular stage matrix");
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
            std::swap(piv[k], piv[p]);
        }
        const double akk = a[k * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double m = a[i * n + k] / akk;
            a[i * n + k] = m;
            for (int j = k + 1; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
        }
    }
}

void lu_solve(const std::vector<double>& a, const std::vector<int>& piv, int n, double* x) {
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) b[i] = x[piv[i]];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) b[i] -= a[i * n + j] * b[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[i] -= a[i * n + j] * b[j];
        b[i] /= a[i * n + i];
    }
    for (int i = 0; i < n; ++i) x[i] = b[i];
}

TrBdf2::TrBdf2(int n) : n_(n) {
    jac_.resize(static_cast<size_t>(n) * n);
    lu_.resize(jac_.size());
    k1_.resize(n); k2_.resize(n); k3_.resize(n);
    y_stage_.resize(n); rhs_.resize(n); delta_.resize(n); err_.resize(n);
    f_tmp_.resize(n); y_tmp_.resize(n);
}

void TrBdf2::numeric_jacobian(const OdeSystem& sys, double t, const std::vector<double>& y) {
    sys.eval(t, y.data(), f_tmp_.data());
    y_tmp_ = y;
    for (int j = 0; j < n_; ++j) {
        const double scale = std::max(std::abs(y[j]), sys.typical(j));
        const double dy = 1e-7 * scale;
        y_tmp_[j] = y[j] + dy;
        sys.eval(t, y_tmp_.data(), k3_.data());   // k3_ reused as scratch here
        for (int i = 0; i < n_; ++i) jac_[i * n_ + j] = (k3_[i] - f_tmp_[i]) / dy;
        y_tmp_[j] = y[j];
    }
}

void TrBdf2::factor_stage_matrix(double dh) {
    lu_ = jac_;
    for (auto& v : lu_) v = -dh * v;
    for (int i = 0; i < n_; ++i) lu_[i * n_ + i] += 1.0;
    lu_factor(lu_, piv_, n_);
}

void TrBdf2::solve_inplace(std::vector<double>& v) const {
    lu_solve(lu_, piv_, n_, v.data());
}

bool TrBdf2::newton_stage(const OdeSystem& sys, double t_stage, double dh,
                          const std::vector<double>& y_pred, std::vector<double>& y_out,
                          std::vector<double>& k_out, const StepControl& ctl,
                          const std::vector<double>& y_ref) {
    // Solve y = y_pred + dh f(t_stage, y).
    for (int it = 0; it < ctl.max_newton; ++it) {
        sys.eval(t_stage, y_out.data(), k_out.data());
        double wrms = 0;
        for (int i = 0; i < n_; ++i) {
            delta_[i] = y_pred[i] + dh * k_out[i] - y_out[i];
        }
        solve_inplace(delta_);
        for (int i = 0; i < n_; ++i) {
            y_out[i] += delta_[i];
            const double w = ctl.abs_tol + ctl.rel_tol * std::abs(y_ref[i]);
            const double e = delta_[i] / w;
            wrms += e * e;
        }
        wrms = std::sqrt(wrms / n_);
        if (!std::isfinite(wrms)) return false;
        if (wrms < 0.03) {
            sys.eval(t_stage, y_out.data(), k_out.data());
            return true;
        }
    }
    return false;
}

StepOutcome TrBdf2::step(const OdeSystem& sys, double t, double h,
                         std::vector<double>& y, const StepControl& ctl) {
    StepOutcome out;
    const std::vector<double> y0 = y;

    sys.eval(t, y0.data(), k1_.data());
    for (int i = 0; i < n_; ++i)
        if (!std::isfinite(k1_[i])) return out;

    numeric_jacobian(sys, t, y0);
    factor_stage_matrix(kD * h);

    // TR stage to t + gamma h.
    for (int i = 0; i < n_; ++i) rhs_[i] = y0[i] + kD * h * k1_[i];
    y_stage_ = y0;
    if (!newton_stage(sys, t + kGamma * h, kD * h, rhs_, y_stage_, k2_, ctl, y0)) return out;

    // BDF2 stage to t + h.
    for (int i = 0; i < n_; ++i) rhs_[i] = y0[i] + h * (kB1 * k1_[i] + kB2 * k2_[i]);
    std::vector<double>& y_new = y;
    y_new = y_stage_;
    if (!newton_stage(sys, t + h, kB3 * h, rhs_, y_new, k3_, ctl, y0)) {
        y = y0;
        return out;
    }

    // Embedded error, filtered through the stage matrix for stiff robustness.
    for (int i = 0; i < n_; ++i)
        err_[i] = h * ((kB1 - kBh1) * k1_[i] + (kB2 - kBh2) * k2_[i] + (kB3 - kBh3) * k3_[i]);
    solve_inplace(err_);
    double wrms = 0;
    for (int i = 0; i < n_; ++i) {
        const double w = ctl.abs_tol +
                         ctl.rel_tol * std::max(std::abs(y0[i]), std::abs(y_new[i]));
        const double e = err_[i] / w;
        wrms += e * e;
    }
    out.err_norm = std::sqrt(wrms / n_);
    out.ok = std::isfinite(out.err_norm);
    if (!out.ok) y = y0;
    return out;
}

double TrBdf2::h_scale(double err_norm) {
    if (err_norm <= 0) return 5.0;
    return std::clamp(0.9 * std::pow(err_norm, -1.0 / 3.0), 0.2, 5.0);
}

} // namespace sapsim
