#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mbsense/resolution.hpp"

namespace mbsense {

// xi = [fc_1..fc_M (GHz), N_1..N_M (real)]
struct ConstraintSet {
    std::vector<double> l, u;  // GHz
    std::vector<double> fs;    // GHz, fixed
    double W = 0.0;            // GHz

    int M() const { return static_cast<int>(l.size()); }
    void validate() const;
    // Rows: lower boxes, upper boxes, M-1 overlaps, budget. With nmin, M extra rows N_m >= 2.
    void linear_form(Eigen::MatrixXd& A, Eigen::VectorXd& b, bool nmin) const;
};

struct SolverOptions {
    double omega = 1e-4;
    int max_ao = 10;
    int max_sca = 200;
    double eps = 1e-7;       // SCA step-norm threshold
    double ao_tol = 1e-4;    // ns, change in the SRL between AO rounds
    double armijo_c1 = 1e-3;
    double armijo_shrink = 0.5;
    double armijo_min = 1.0 / 1048576.0;
    double qp_tol = 1e-10;
    double srl_tol = 1e-6;
    int restarts = 8;
    std::uint64_t seed = 1;
    int threads = 1;
};

Eigen::VectorXd constraints_eval(const Eigen::VectorXd& xi, const ConstraintSet& cs);

// C_dtau at xi for the scenario's gains, noise and distortion flags.
double crb_objective(const Eigen::VectorXd& xi, double dtau, const ConstraintSet& cs,
                     const TwoPathScenario& model);

Eigen::VectorXd crb_gradient(const Eigen::VectorXd& xi, double dtau, const ConstraintSet& cs,
                             const TwoPathScenario& model);

// Euclidean projection onto {A x <= b} by a primal active-set method started at feasible x0.
struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;  // per constraint row, zero when inactive
    double kkt_residual = 0.0;
    int iterations = 0;
};
QpResult project_polytope(const Eigen::VectorXd& z, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& x0, double tol = 1e-10);

Eigen::VectorXd sca_subproblem(const Eigen::VectorXd& xi_t, const Eigen::VectorXd& g, double omega,
                               const ConstraintSet& cs, double tol = 1e-10);

struct ArmijoResult {
    double sigma = 0.0;
    double value = 0.0;
    bool floor_hit = false;
};
ArmijoResult armijo_step(const Eigen::VectorXd& xi_t, const Eigen::VectorXd& xi_bar, double f0,
                         const Eigen::VectorXd& g, const std::function<double(const Eigen::VectorXd&)>& f,
                         const SolverOptions& opt);

struct ScaResult {
    Eigen::VectorXd xi;
    std::vector<double> objective;  // one entry per iterate, starting at xi0
    double step_norm = 0.0;         // ||xi_bar - xi|| at exit
    int iterations = 0;
    int floor_steps = 0;
    double max_violation = 0.0;     // largest constraint residual over all iterates
};
ScaResult sca_minimize(const Eigen::VectorXd& xi0, double dtau, const ConstraintSet& cs,
                       const TwoPathScenario& model, const SolverOptions& opt);

// Even split of W clipped to the boxes, packed left to right. Throws InfeasibleError.
Eigen::VectorXd feasible_start(const ConstraintSet& cs);

struct OptimizeResult {
    std::vector<double> fc;
    std::vector<int> N;
    double srl = 0.0;   // at the integer point
    double deb = 0.0;   // at the integer point, dtau = srl
    double relaxed_srl = 0.0;
    std::vector<double> ao_trace;
    std::vector<std::vector<double>> sca_traces;
    Eigen::VectorXd residuals;
    bool feasible = false;
    bool converged = false;
    int best_restart = 0;
    std::vector<double> restart_srl;
    std::vector<std::vector<double>> restart_traces;
    double max_iterate_violation = 0.0;  // over every SCA iterate of every restart
    std::string init_heuristic = "even-split, outer-baseline, seeded random";
};

OptimizeResult ao_optimize(const ConstraintSet& cs, const TwoPathScenario& model,
                           const SolverOptions& opt);

struct Design {
    std::vector<double> fc;
    std::vector<int> N;
    double srl = 0.0;
    double deb = 0.0;
    bool feasible = false;  // every constraint residual <= 0
};
Design baseline_centered(const ConstraintSet& cs, const TwoPathScenario& model);
Design baseline_outer(const ConstraintSet& cs, const TwoPathScenario& model);

// SRL and DEB of an integer design with the default bracket.
Design evaluate_design(const ConstraintSet& cs, const TwoPathScenario& model,
                       const std::vector<double>& fc, const std::vector<int>& N, double srl_tol = 1e-6);

// Mean of |alpha_k| over an estimated path population.
double mean_amplitude(const std::vector<cplx>& alphas);

// Number of contiguous groups in a design. Subbands merge when the gap between them is
// below one subcarrier spacing, which is what flooring N can open up between touching bands.
int band_groups(const std::vector<double>& fc, const std::vector<int>& N, const std::vector<double>& fs);

}  // namespace mbsense
