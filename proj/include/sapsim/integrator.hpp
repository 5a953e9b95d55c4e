#pragma once

// One-step TR-BDF2 integrator (trapezoidal stage to t + gamma h followed by a
// BDF2 stage to t + h, gamma = 2 - sqrt(2)).  A-stable, stiffly accurate,
// with an embedded third-order error estimate filtered through the stage
// matrix.  Newton iterations use a finite-difference Jacobian refreshed once
// per step.

#include <vector>

namespace sapsim {

class OdeSystem {
  public:
    virtual ~OdeSystem() = default;
    virtual int size() const = 0;
    virtual void eval(double t, const double* y, double* f) const = 0;
    // Magnitude scale of component i, used for Jacobian perturbations.
    virtual double typical(int i) const { (void)i; return 1.0; }
};

struct StepControl {
    double abs_tol = 7e-8;
    double rel_tol = 1e-12;
    int max_newton = 12;
};

struct StepOutcome {
    bool ok = false;          // Newton converged at both stages
    double err_norm = 0.0;    // weighted RMS local error; accept when <= 1
};

class TrBdf2 {
  public:
    explicit TrBdf2(int n);

    StepOutcome step(const OdeSystem& sys, double t, double h,
                     std::vector<double>& y, const StepControl& ctl);

    // Step-size update factor from a weighted-RMS error norm (3rd-order
    // estimate, so exponent -1/3), clamped to [0.2, 5].
    static double h_scale(double err_norm);

  private:
    int n_;
    std::vector<double> jac_, lu_;
    std::vector<int> piv_;
    std::vector<double> k1_, k2_, k3_, y_stage_, rhs_, delta_, err_, f_tmp_, y_tmp_;

    void numeric_jacobian(const OdeSystem& sys, double t, const std::vector<double>& y);
    void factor_stage_matrix(double dh);
    void solve_inplace(std::vector<double>& v) const;
    bool newton_stage(const OdeSystem& sys, double t_stage, double dh,
                      const std::vector<double>& y_pred, std::vector<double>& y_out,
                      std::vector<double>& k_out, const StepControl& ctl,
                      const std::vector<double>& y_weights_ref);
};

// Dense LU with partial pivoting on an n x n row-major matrix.
void lu_factor(std::vector<double>& a, std::vector<int>& piv, int n);
void lu_solve(const std::vector<double>& a, const std::vector<int>& piv, int n, double* x);

} // namespace sapsim
