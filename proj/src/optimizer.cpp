#include "mbsense/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace mbsense {

void ConstraintSet::validate() const {
    const int m = M();
    if (m < 1) throw std::invalid_argument("constraints: at least one subband");
    if (static_cast<int>(u.size()) != m || static_cast<int>(fs.size()) != m)
        throw std::invalid_argument("constraints: l, u, fs length mismatch");
    std::vector<int> bad;
    for (int i = 0; i < m; ++i) {
        if (!(fs[i] > 0.0)) throw std::invalid_argument("constraints: fs must be > 0");
        if (!(l[i] < u[i])) bad.push_back(i);
    }
    if (!bad.empty()) throw InfeasibleError("constraints: inverted box (l >= u)", bad);
    if (!(W > 0.0)) throw InfeasibleError("constraints: W must be > 0", {3 * m - 1});
    for (int i = 0; i + 1 < m; ++i)
        if (l[i] > l[i + 1]) throw std::invalid_argument("constraints: l must be nondecreasing");
}

void ConstraintSet::linear_form(Eigen::MatrixXd& A, Eigen::VectorXd& b, bool nmin) const {
    const int m = M(), n = 2 * m;
    const int rows = 3 * m + (nmin ? m : 0);
    A = Eigen::MatrixXd::Zero(rows, n);
    b = Eigen::VectorXd::Zero(rows);
    for (int i = 0; i < m; ++i) {
        // l - (fc - B/2) <= 0
        A(i, i) = -1.0;
        A(i, m + i) = 0.5 * fs[i];
        b(i) = -l[i];
        // fc + B/2 - u <= 0
        A(m + i, i) = 1.0;
        A(m + i, m + i) = 0.5 * fs[i];
        b(m + i) = u[i];
    }
    for (int i = 0; i + 1 < m; ++i) {
        int r = 2 * m + i;
        A(r, i) = 1.0;
        A(r, i + 1) = -1.0;
        A(r, m + i) = 0.5 * fs[i];
        A(r, m + i + 1) = 0.5 * fs[i + 1];
    }
    for (int i = 0; i < m; ++i) A(3 * m - 1, m + i) = fs[i];
    b(3 * m - 1) = W;
    if (nmin) {
        for (int i = 0; i < m; ++i) {
            A(3 * m + i, m + i) = -1.0;
            b(3 * m + i) = -2.0;
        }
    }
}

Eigen::VectorXd constraints_eval(const Eigen::VectorXd& xi, const ConstraintSet& cs) {
    if (xi.size() != 2 * cs.M()) throw std::invalid_argument("constraints_eval: dimension mismatch");
    const int m = cs.M();
    Eigen::VectorXd r(3 * m);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        double B = xi(m + i) * cs.fs[i];
        r(i) = cs.l[i] - (xi(i) - 0.5 * B);
        r(m + i) = (xi(i) + 0.5 * B) - cs.u[i];
        total += B;
    }
    for (int i = 0; i + 1 < m; ++i) {
        double B0 = xi(m + i) * cs.fs[i], B1 = xi(m + i + 1) * cs.fs[i + 1];
        r(2 * m + i) = (xi(i) + 0.5 * B0) - (xi(i + 1) - 0.5 * B1);
    }
    r(3 * m - 1) = total - cs.W;
    return r;
}

namespace {

TwoPathScenario at(const Eigen::VectorXd& xi, const ConstraintSet& cs, const TwoPathScenario& model) {
    TwoPathScenario s = model;
    const int m = cs.M();
    s.bands.fc.assign(xi.data(), xi.data() + m);
    s.bands.N.assign(xi.data() + m, xi.data() + 2 * m);
    s.bands.fs = cs.fs;
    s.summation = false;
    return s;
}

double obj_or_inf(const Eigen::VectorXd& xi, double dtau, const ConstraintSet& cs,
                  const TwoPathScenario& model) {
    try {
        return crb_objective(xi, dtau, cs, model);
    } catch (const SingularMatrixError&) {
        return std::numeric_limits<double>::infinity();
    }
}

}  // namespace

double crb_objective(const Eigen::VectorXd& xi, double dtau, const ConstraintSet& cs,
                     const TwoPathScenario& model) {
    return at(xi, cs, model).c_dtau(dtau);
}

Eigen::VectorXd crb_gradient(const Eigen::VectorXd& xi, double dtau, const ConstraintSet& cs,
                             const TwoPathScenario& model) {
    FisherMatrix F0 = at(xi, cs, model).fim(dtau);
    Eigen::MatrixXd T = separation_basis(F0.layout);
    Eigen::MatrixXd Ji = checked_inverse(T.transpose() * F0.J * T);
    Eigen::VectorXd g(xi.size());
    for (int i = 0; i < xi.size(); ++i) {
        // fourth-order stencil: wide steps keep rounding in J from being amplified by the
        // inverse when C is large
        const bool carrier = i < cs.M();
        const double h = carrier ? 2e-5 : 1e-3 * std::max(std::abs(xi(i)), 1.0);
        auto J_at = [&](double s) {
            Eigen::VectorXd x = xi;
            x(i) += s * h;
            return at(x, cs, model).fim(dtau).J;
        };
        Eigen::MatrixXd dJ = (8.0 * (J_at(1) - J_at(-1)) - (J_at(2) - J_at(-2))) / (12.0 * h);
        g(i) = -(Ji.row(1) * (T.transpose() * dJ * T) * Ji.col(1))(0, 0);
    }
    return g;
}

QpResult project_polytope(const Eigen::VectorXd& z, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& x0, double tol) {
    const int n = static_cast<int>(z.size()), J = static_cast<int>(A.rows());
    Eigen::VectorXd r0 = A * x0 - b;
    std::vector<int> bad;
    for (int i = 0; i < J; ++i)
        if (r0(i) > 1e3 * tol) bad.push_back(i);
    if (!bad.empty()) throw InfeasibleError("project_polytope: start point is infeasible", bad);

    QpResult out;
    Eigen::VectorXd x = x0;
    std::vector<int> W;
    Eigen::VectorXd lam;
    const int max_iter = 50 * (n + J);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        Eigen::VectorXd xs = z;
        if (!W.empty()) {
            Eigen::MatrixXd AW(W.size(), n);
            Eigen::VectorXd bW(W.size());
            for (size_t k = 0; k < W.size(); ++k) {
                AW.row(k) = A.row(W[k]);
                bW(k) = b(W[k]);
            }
            lam = (AW * AW.transpose()).ldlt().solve(AW * z - bW);
            xs = z - AW.transpose() * lam;
        } else {
            lam.resize(0);
        }
        Eigen::VectorXd p = xs - x;
        if (p.norm() <= tol * (1.0 + x.norm())) {
            int worst = -1;
            double lo = -tol;
            for (int k = 0; k < lam.size(); ++k)
                if (lam(k) < lo) {
                    lo = lam(k);
                    worst = k;
                }
            if (worst < 0) break;
            W.erase(W.begin() + worst);
            continue;
        }
        double alpha = 1.0;
        int block = -1;
        for (int i = 0; i < J; ++i) {
            if (std::find(W.begin(), W.end(), i) != W.end()) continue;
            double ap = A.row(i).dot(p);
            if (ap <= 1e-14 * p.norm()) continue;
            double ratio = std::max(0.0, (b(i) - A.row(i).dot(x)) / ap);
            if (ratio < alpha) {
                alpha = ratio;
                block = i;
            }
        }
        x += alpha * p;
        if (block >= 0) W.push_back(block);
    }
    out.x = x;
    out.lambda = Eigen::VectorXd::Zero(J);
    for (size_t k = 0; k < W.size() && static_cast<int>(k) < lam.size(); ++k) out.lambda(W[k]) = lam(k);
    Eigen::VectorXd stat = x - z + A.transpose() * out.lambda;
    Eigen::VectorXd res = A * x - b;
    double kkt = stat.lpNorm<Eigen::Infinity>();
    for (int i = 0; i < J; ++i) {
        kkt = std::max(kkt, std::max(0.0, res(i)));
        kkt = std::max(kkt, std::abs(out.lambda(i) * res(i)));
        kkt = std::max(kkt, std::max(0.0, -out.lambda(i)));
    }
    out.kkt_residual = kkt;
    return out;
}

Eigen::VectorXd sca_subproblem(const Eigen::VectorXd& xi_t, const Eigen::VectorXd& g, double omega,
                               const ConstraintSet& cs, double tol) {
    if (!(omega > 0.0)) throw std::invalid_argument("sca_subproblem: omega must be > 0");
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    cs.linear_form(A, b, true);
    return project_polytope(xi_t - g / (2.0 * omega), A, b, xi_t, tol).x;
}

ArmijoResult armijo_step(const Eigen::VectorXd& xi_t, const Eigen::VectorXd& xi_bar, double f0,
                         const Eigen::VectorXd& g, const std::function<double(const Eigen::VectorXd&)>& f,
                         const SolverOptions& opt) {
    ArmijoResult r;
    Eigen::VectorXd d = xi_bar - xi_t;
    if (d.norm() == 0.0) {
        r.value = f0;
        return r;
    }
    const double slope = g.dot(d);
    double sigma = 1.0;
    while (sigma >= opt.armijo_min) {
        double v = f(xi_t + sigma * d);
        if (v <= f0 + opt.armijo_c1 * sigma * slope) {
            r.sigma = sigma;
            r.value = v;
            return r;
        }
        sigma *= opt.armijo_shrink;
    }
    r.sigma = opt.armijo_min;
    r.value = f(xi_t + r.sigma * d);
    r.floor_hit = true;
    return r;
}

ScaResult sca_minimize(const Eigen::VectorXd& xi0, double dtau, const ConstraintSet& cs,
                       const TwoPathScenario& model, const SolverOptions& opt) {
    auto f = [&](const Eigen::VectorXd& x) { return obj_or_inf(x, dtau, cs, model); };
    ScaResult r;
    r.xi = xi0;
    double fx = crb_objective(xi0, dtau, cs, model);
    r.objective.push_back(fx);
    r.max_violation = constraints_eval(xi0, cs).maxCoeff();
    for (int t = 0; t < opt.max_sca; ++t) {
        Eigen::VectorXd g = crb_gradient(r.xi, dtau, cs, model);
        Eigen::VectorXd xb = sca_subproblem(r.xi, g, opt.omega, cs, opt.qp_tol);
        r.step_norm = (xb - r.xi).norm();
        if (r.step_norm <= opt.eps) break;
        ArmijoResult a = armijo_step(r.xi, xb, fx, g, f, opt);
        if (a.floor_hit) {
            ++r.floor_steps;
            if (!(a.value <= fx)) break;  // no descent left along this direction
        }
        Eigen::VectorXd next = r.xi + a.sigma * (xb - r.xi);
        double moved = (next - r.xi).norm();
        r.xi = next;
        r.max_violation = std::max(r.max_violation, constraints_eval(next, cs).maxCoeff());
        fx = a.value;
        r.objective.push_back(fx);
        r.iterations = t + 1;
        if (moved <= opt.eps) break;
    }
    return r;
}

Eigen::VectorXd feasible_start(const ConstraintSet& cs) {
    cs.validate();
    const int m = cs.M();
    Eigen::VectorXd xi(2 * m);
    Eigen::VectorXd last;
    for (double scale = 1.0; scale > 1e-6; scale *= 0.5) {
        std::vector<double> B(m);
        double total = 0.0;
        for (int i = 0; i < m; ++i) {
            B[i] = std::max(2.0 * cs.fs[i], std::min(scale * cs.W / m, cs.u[i] - cs.l[i]));
            total += B[i];
        }
        for (int i = 0; i < m; ++i) xi(m + i) = B[i] / cs.fs[i];
        // box centers first, then left-packed
        for (int pass = 0; pass < 2; ++pass) {
            double right = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                double c = pass == 0 ? 0.5 * (cs.l[i] + cs.u[i]) : cs.l[i] + 0.5 * B[i];
                xi(i) = std::max(c, right + 0.5 * B[i]);
                right = xi(i) + 0.5 * B[i];
            }
            last = xi;
            if (total <= cs.W && (constraints_eval(xi, cs).array() <= 0.0).all()) return xi;
        }
        bool at_min = true;
        for (int i = 0; i < m; ++i) at_min = at_min && B[i] <= 2.0 * cs.fs[i];
        if (at_min) break;
    }
    std::vector<int> bad;
    Eigen::VectorXd r = constraints_eval(last, cs);
    for (int i = 0; i < r.size(); ++i)
        if (r(i) > 0.0) bad.push_back(i);
    throw InfeasibleError("no feasible starting point for the constraint set", bad);
}

double mean_amplitude(const std::vector<cplx>& alphas) {
    if (alphas.empty()) throw std::invalid_argument("mean_amplitude: empty population");
    double s = 0.0;
    for (const auto& a : alphas) s += std::abs(a);
    return s / alphas.size();
}

int band_groups(const std::vector<double>& fc, const std::vector<int>& N, const std::vector<double>& fs) {
    struct Iv {
        double lo, hi, fs;
    };
    std::vector<Iv> iv;
    for (size_t i = 0; i < fc.size(); ++i) {
        double B = N[i] * fs[i];
        iv.push_back({fc[i] - 0.5 * B, fc[i] + 0.5 * B, fs[i]});
    }
    std::sort(iv.begin(), iv.end(), [](const Iv& a, const Iv& b) { return a.lo < b.lo; });
    int groups = 0;
    double right = -std::numeric_limits<double>::infinity();
    double right_fs = 0.0;
    for (const auto& v : iv) {
        if (v.lo - right >= std::max(v.fs, right_fs)) ++groups;
        if (v.hi > right) {
            right = v.hi;
            right_fs = v.fs;
        }
    }
    return groups;
}

Design evaluate_design(const ConstraintSet& cs, const TwoPathScenario& model,
                       const std::vector<double>& fc, const std::vector<int>& N, double srl_tol) {
    Design d{fc, N, 0.0, 0.0, false};
    Eigen::VectorXd x(2 * cs.M());
    for (int i = 0; i < cs.M(); ++i) {
        x(i) = fc[i];
        x(cs.M() + i) = N[i];
    }
    d.feasible = (constraints_eval(x, cs).array() <= 0.0).all();
    SrlQuery q;
    q.scenario = model;
    q.scenario.bands.fc = fc;
    q.scenario.bands.fs = cs.fs;
    q.scenario.bands.N.assign(N.begin(), N.end());
    q.tol = srl_tol;
    d.srl = srl_solve(q).dtau;
    d.deb = deb(q.scenario.fim(d.srl), 2);
    return d;
}

namespace {

std::vector<int> nominal_counts(const ConstraintSet& cs) {
    std::vector<int> N;
    for (int i = 0; i < cs.M(); ++i)
        N.push_back(static_cast<int>(std::lround(cs.W / cs.M() / cs.fs[i])));
    return N;
}

}  // namespace

Design baseline_centered(const ConstraintSet& cs, const TwoPathScenario& model) {
    std::vector<double> fc;
    for (int i = 0; i < cs.M(); ++i) fc.push_back(0.5 * (cs.l[i] + cs.u[i]));
    return evaluate_design(cs, model, fc, nominal_counts(cs));
}

Design baseline_outer(const ConstraintSet& cs, const TwoPathScenario& model) {
    auto N = nominal_counts(cs);
    const int m = cs.M();
    std::vector<double> fc;
    for (int i = 0; i < m; ++i) fc.push_back(0.5 * (cs.l[i] + cs.u[i]));
    fc[0] = cs.l[0] + 0.5 * N[0] * cs.fs[0];
    if (m > 1) fc[m - 1] = cs.u[m - 1] - 0.5 * N[m - 1] * cs.fs[m - 1];
    return evaluate_design(cs, model, fc, N);
}

namespace {

struct RestartOutcome {
    Eigen::VectorXd xi;  // relaxed optimum
    std::vector<double> fc;
    std::vector<int> N;
    double srl = std::numeric_limits<double>::infinity();
    double relaxed_srl = 0.0;
    std::vector<double> ao_trace;
    std::vector<std::vector<double>> sca_traces;
    bool converged = false;
    double max_violation = -std::numeric_limits<double>::infinity();
    std::string error;
};

Eigen::VectorXd random_start(const ConstraintSet& cs, const Eigen::VectorXd& base, std::uint64_t seed,
                             int r, double tol) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    const int m = cs.M();
    Eigen::VectorXd z(2 * m);
    std::gamma_distribution<double> gam(1.0, 1.0);
    std::vector<double> w(m);
    double ws = 0.0;
    for (auto& v : w) ws += (v = gam(rng));
    for (int i = 0; i < m; ++i) {
        std::uniform_real_distribution<double> uf(cs.l[i], cs.u[i]);
        z(i) = uf(rng);
        double B = std::clamp(cs.W * w[i] / ws, 2.0 * cs.fs[i], cs.u[i] - cs.l[i]);
        z(m + i) = B / cs.fs[i];
    }
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    cs.linear_form(A, b, true);
    return project_polytope(z, A, b, base, tol).x;
}

Eigen::VectorXd pack_design(const std::vector<double>& fc, const std::vector<int>& N) {
    const int m = static_cast<int>(fc.size());
    Eigen::VectorXd x(2 * m);
    for (int i = 0; i < m; ++i) {
        x(i) = fc[i];
        x(m + i) = N[i];
    }
    return x;
}

// Nudge carriers back inside when a count change or floating-point noise left a residual above
// zero. Drops a subcarrier from the largest band if the budget is exceeded and drop_on_budget is
// set. Returns whether the design ends feasible.
bool repair_design(const ConstraintSet& cs, std::vector<double>& fc, std::vector<int>& N, bool drop_on_budget) {
    const int m = cs.M();
    for (int pass = 0; pass < 8; ++pass) {
        Eigen::VectorXd r = constraints_eval(pack_design(fc, N), cs);
        if ((r.array() <= 0.0).all()) return true;
        if (r(3 * m - 1) > 0.0) {
            if (!drop_on_budget) return false;
            int big = static_cast<int>(std::max_element(N.begin(), N.end()) - N.begin());
            N[big] -= 1;
            continue;
        }
        for (int i = 0; i < m; ++i) {
            double nudge = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fc[i]));
            if (r(i) > 0.0) fc[i] += r(i) + nudge;
            if (r(m + i) > 0.0) fc[i] -= r(m + i) + nudge;
        }
        for (int i = 0; i + 1 < m; ++i) {
            double v = r(2 * m + i);
            if (v > 0.0) {
                double nudge = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fc[i]));
                fc[i] -= 0.5 * v + nudge;
                fc[i + 1] += 0.5 * v + nudge;
            }
        }
    }
    return (constraints_eval(pack_design(fc, N), cs).array() <= 0.0).all();
}

// Floor N, repair, then spend what flooring left of the budget one subcarrier at a time wherever
// it lowers the SRL most.
Design round_design(const Eigen::VectorXd& xi, const ConstraintSet& cs, const TwoPathScenario& model,
                    double srl_tol) {
    const int m = cs.M();
    std::vector<double> fc(xi.data(), xi.data() + m);
    std::vector<int> N(m);
    for (int i = 0; i < m; ++i) N[i] = std::max(2, static_cast<int>(std::floor(xi(m + i) + 1e-9)));
    repair_design(cs, fc, N, true);
    Design best = evaluate_design(cs, model, fc, N, srl_tol);
    for (int step = 0; step < 4 * m; ++step) {
        Design cand_best = best;
        for (int i = 0; i < m; ++i) {
            std::vector<double> f = best.fc;
            std::vector<int> n = best.N;
            n[i] += 1;
            if (!repair_design(cs, f, n, false)) continue;
            try {
                Design d = evaluate_design(cs, model, f, n, srl_tol);
                if (d.srl < cand_best.srl) cand_best = d;
            } catch (const NoSrlInBracketError&) {
            }
        }
        if (!(cand_best.srl < best.srl)) break;
        best = cand_best;
    }
    return best;
}

RestartOutcome run_restart(const ConstraintSet& cs, const TwoPathScenario& model, const SolverOptions& opt,
                           const Eigen::VectorXd& start) {
    RestartOutcome o;
    Eigen::VectorXd xi = start;
    double prev = 0.0;
    for (int i = 0; i < opt.max_ao; ++i) {
        SrlQuery q;
        q.scenario = at(xi, cs, model);
        q.tol = opt.srl_tol;
        SrlResult s;
        bool ok = false;
        if (i > 0) {
            SrlQuery w = q;
            w.lo = prev / 10.0;
            w.hi = 2.0 * prev;
            w.require_positive_lo = true;
            try {
                s = srl_solve(w);
                ok = true;
            } catch (const NoSrlInBracketError&) {
            }
        }
        if (!ok) s = srl_solve(q);
        o.ao_trace.push_back(s.dtau);
        if (i > 0 && std::abs(prev - s.dtau) <= opt.ao_tol) {
            o.converged = true;
            break;
        }
        prev = s.dtau;
        ScaResult sr = sca_minimize(xi, s.dtau, cs, model, opt);
        o.sca_traces.push_back(sr.objective);
        o.max_violation = std::max(o.max_violation, sr.max_violation);
        xi = sr.xi;
    }
    o.xi = xi;
    o.relaxed_srl = o.ao_trace.back();
    Design d = round_design(xi, cs, model, opt.srl_tol);
    o.fc = d.fc;
    o.N = d.N;
    o.srl = d.srl;
    return o;
}

bool better(const RestartOutcome& a, const RestartOutcome& b) {
    if (a.srl != b.srl) return a.srl < b.srl;
    for (size_t i = 0; i < a.fc.size(); ++i)
        if (a.fc[i] != b.fc[i]) return a.fc[i] < b.fc[i];
    return a.N < b.N;
}

}  // namespace

OptimizeResult ao_optimize(const ConstraintSet& cs, const TwoPathScenario& model, const SolverOptions& opt) {
    Eigen::VectorXd base = feasible_start(cs);
    const int R = std::max(1, opt.restarts);
    std::vector<RestartOutcome> out(R);
    std::vector<Eigen::VectorXd> starts(R);
    starts[0] = base;
    for (int r = 1; r < R; ++r) starts[r] = random_start(cs, base, opt.seed, r, opt.qp_tol);
    // restart 1 begins at the outer baseline, so the search never ends worse than that design
    // unless rounding costs more than it gains
    if (R > 1) {
        try {
            Design outer = baseline_outer(cs, model);
            if (outer.feasible) starts[1] = pack_design(outer.fc, outer.N);
        } catch (const std::exception&) {
            // keep the random start
        }
    }

    int nthreads = std::max(1, std::min(opt.threads, R));
    auto work = [&](int w) {
        for (int r = w; r < R; r += nthreads) {
            try {
                out[r] = run_restart(cs, model, opt, starts[r]);
            } catch (const std::exception& e) {
                out[r].error = e.what();
            }
        }
    };
    if (nthreads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nthreads; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    int best = -1;
    for (int r = 0; r < R; ++r) {
        if (!out[r].error.empty()) continue;
        if (best < 0 || better(out[r], out[best])) best = r;
    }
    if (best < 0) throw std::runtime_error("ao_optimize: every restart failed: " + out[0].error);

    const RestartOutcome& o = out[best];
    OptimizeResult res;
    res.fc = o.fc;
    res.N = o.N;
    res.srl = o.srl;
    res.relaxed_srl = o.relaxed_srl;
    res.ao_trace = o.ao_trace;
    res.sca_traces = o.sca_traces;
    res.converged = o.converged;
    res.best_restart = best;
    res.max_iterate_violation = -std::numeric_limits<double>::infinity();
    for (const auto& r : out) {
        res.restart_srl.push_back(r.error.empty() ? r.srl : std::nan(""));
        res.restart_traces.push_back(r.ao_trace);
        if (r.error.empty()) res.max_iterate_violation = std::max(res.max_iterate_violation, r.max_violation);
    }
    Eigen::VectorXd x(2 * cs.M());
    for (int i = 0; i < cs.M(); ++i) {
        x(i) = res.fc[i];
        x(cs.M() + i) = res.N[i];
    }
    res.residuals = constraints_eval(x, cs);
    res.feasible = (res.residuals.array() <= 0.0).all();
    res.deb = evaluate_design(cs, model, res.fc, res.N, opt.srl_tol).deb;
    return res;
}

}  // namespace mbsense
