#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mbsense/fisher.hpp"
#include "mbsense/model.hpp"
#include "mbsense/optimizer.hpp"
#include "mbsense/resolution.hpp"
#include "mbsense/zzb.hpp"

namespace py = pybind11;
using namespace mbsense;

namespace {

MultibandConfig config_of(std::vector<double> fc, std::vector<double> fs, std::vector<int> N) {
    MultibandConfig c{std::move(fc), std::move(fs), std::move(N)};
    c.validate();
    return c;
}

FisherMatrix fim_of(const MultibandConfig& c, const std::vector<cplx>& alpha, const std::vector<double>& tau,
                    double sigma2, double sigma_p, bool phase, bool timing, const std::string& method) {
    PathSet p{alpha, tau};
    p.validate();
    // the FIM does not depend on the distortion values, only on whether they are present
    auto cp = canonicalize(c, p, DistortionModel::none(c.M(), sigma_p));
    if (method == "summation") return fim_summation(c, cp, sigma2, sigma_p, phase, timing);
    if (method == "compact") return fim_compact_two_path(c, cp, sigma2, sigma_p, phase, timing);
    throw std::invalid_argument("method must be 'compact' or 'summation'");
}

TwoPathScenario scenario_of(std::vector<double> fc, std::vector<double> fs, std::vector<double> N, cplx a1,
                            cplx a2, double sigma2, double sigma_p, bool phase, bool timing) {
    TwoPathScenario s;
    s.bands = BandSet{std::move(fc), std::move(fs), std::move(N)};
    s.alpha1 = a1;
    s.alpha2 = a2;
    s.sigma2 = sigma2;
    s.sigma_p = sigma_p;
    s.phase = phase;
    s.timing = timing;
    return s;
}

ZzbSpec zzb_spec(std::vector<double> fc, std::vector<double> fs, std::vector<int> N, double snr_db, double D,
                 double a1) {
    ZzbSpec s;
    s.config = config_of(std::move(fc), std::move(fs), std::move(N));
    s.sigma2 = NoiseModel::from_snr_db(snr_db).sigma2;
    s.D = D;
    s.a1 = a1;
    return s;
}

py::dict design_dict(const std::vector<double>& fc, const std::vector<int>& N, double srl, double deb,
                     bool feasible = true) {
    py::dict d;
    d["fc"] = fc;
    d["N"] = N;
    d["srl"] = srl;
    d["deb"] = deb;
    d["feasible"] = feasible;
    return d;
}

}  // namespace

PYBIND11_MODULE(_mbsense, m) {
    m.doc() = "Fisher information, resolution limits, Ziv-Zakai bounds and spectrum optimization for "
              "multiband delay estimation. Frequencies in GHz, delays in ns.";

    py::register_exception<SingularMatrixError>(m, "SingularMatrixError", PyExc_ArithmeticError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_ValueError);
    py::register_exception<NoSrlInBracketError>(m, "NoSrlInBracketError", PyExc_RuntimeError);

    m.def("snr_to_sigma2", [](double snr_db) { return NoiseModel::from_snr_db(snr_db).sigma2; }, py::arg("snr_db"));

    m.def(
        "dirichlet_gamma",
        [](double N, double fs, double dtau) {
            auto t = dirichlet_gamma(N, fs, dtau);
            return py::make_tuple(t.g, t.d1, t.d2);
        },
        py::arg("N"), py::arg("fs"), py::arg("dtau"), "gamma and its first two derivatives in dtau");

    m.def(
        "fim",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<int> N, std::vector<cplx> alpha,
           std::vector<double> tau, double sigma2, double sigma_p, bool phase, bool timing, std::string method) {
            return fim_of(config_of(fc, fs, N), alpha, tau, sigma2, sigma_p, phase, timing, method).J;
        },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("alpha"), py::arg("tau"), py::arg("sigma2"),
        py::arg("sigma_p") = 1.0, py::arg("phase") = true, py::arg("timing") = true,
        py::arg("method") = "summation",
        "FIM over [tau, Re alpha', Im alpha', phi'_2..M, delta_1..M]");

    m.def(
        "crb_delay_separation",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<int> N, std::vector<cplx> alpha,
           std::vector<double> tau, double sigma2, double sigma_p, bool phase, bool timing) {
            return crb_delay_separation(
                fim_of(config_of(fc, fs, N), alpha, tau, sigma2, sigma_p, phase, timing, "compact"));
        },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("alpha"), py::arg("tau"), py::arg("sigma2"),
        py::arg("sigma_p") = 1.0, py::arg("phase") = true, py::arg("timing") = true);

    m.def(
        "deb",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<int> N, std::vector<cplx> alpha,
           std::vector<double> tau, double sigma2, double sigma_p, bool phase, bool timing) {
            return deb(fim_of(config_of(fc, fs, N), alpha, tau, sigma2, sigma_p, phase, timing, "summation"),
                       static_cast<int>(alpha.size()));
        },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("alpha"), py::arg("tau"), py::arg("sigma2"),
        py::arg("sigma_p") = 1.0, py::arg("phase") = true, py::arg("timing") = true);

    m.def(
        "crb_closed_form",
        [](double Nbar, double fs, double dfc, double dtau) {
            auto c = crb_closed_form(Nbar, fs, dfc, dtau);
            py::dict d;
            d["c_dtau"] = c.c_dtau;
            d["crb_up"] = c.crb_up;
            d["crb_low"] = c.crb_low;
            d["t"] = c.t;
            return d;
        },
        py::arg("Nbar"), py::arg("fs"), py::arg("dfc"), py::arg("dtau"), "equal unit gains, sigma2 = 2");

    m.def(
        "srl",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<double> N, cplx alpha1, cplx alpha2,
           double sigma2, double sigma_p, bool phase, bool timing, double lo, double hi, double tol) {
            SrlQuery q;
            q.scenario = scenario_of(fc, fs, N, alpha1, alpha2, sigma2, sigma_p, phase, timing);
            q.lo = lo;
            q.hi = hi;
            q.tol = tol;
            auto r = srl_solve(q);
            return py::make_tuple(r.dtau, r.residual);
        },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("alpha1"), py::arg("alpha2"), py::arg("sigma2"),
        py::arg("sigma_p") = 1.0, py::arg("phase") = true, py::arg("timing") = true, py::arg("lo") = 1e-3,
        py::arg("hi") = 50.0, py::arg("tol") = 1e-6, "(srl, fixed-point residual)");

    m.def(
        "zzb",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<int> N, double snr_db, double D,
           double a1) { return zzb_delay(zzb_spec(fc, fs, N, snr_db, D, a1)).sqrt_zzb; },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("snr_db"), py::arg("D") = 10.0, py::arg("a1") = 1.0,
        "sqrt of the Ziv-Zakai bound on the delay, ns");

    m.def(
        "ecrb",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<int> N, double snr_db, double D, double a1,
           int draws, std::uint64_t seed) {
            return ecrb_single_path(zzb_spec(fc, fs, N, snr_db, D, a1), draws, seed).ecrb;
        },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("snr_db"), py::arg("D") = 10.0, py::arg("a1") = 1.0,
        py::arg("draws") = 100, py::arg("seed") = 1);

    m.def(
        "map_rmse",
        [](std::vector<double> fc, std::vector<double> fs, std::vector<int> N, double snr_db, double D, double a1,
           int trials, std::uint64_t seed, int threads) {
            MapOptions o;
            o.trials = trials;
            o.threads = threads;
            py::gil_scoped_release nogil;
            return map_rmse(zzb_spec(fc, fs, N, snr_db, D, a1), o, seed);
        },
        py::arg("fc"), py::arg("fs"), py::arg("N"), py::arg("snr_db"), py::arg("D") = 10.0, py::arg("a1") = 1.0,
        py::arg("trials") = 200, py::arg("seed") = 1, py::arg("threads") = 1);

    m.def(
        "optimize",
        [](std::vector<double> l, std::vector<double> u, std::vector<double> fs, double W, cplx alpha1, cplx alpha2,
           double sigma2, double sigma_p, int restarts, std::uint64_t seed) {
            ConstraintSet cs{l, u, fs, W};
            auto model = scenario_of({}, {}, {}, alpha1, alpha2, sigma2, sigma_p, true, true);
            SolverOptions o;
            o.restarts = restarts;
            o.seed = seed;
            OptimizeResult r;
            {
                py::gil_scoped_release nogil;
                r = ao_optimize(cs, model, o);
            }
            py::dict d = design_dict(r.fc, r.N, r.srl, r.deb);
            d["relaxed_srl"] = r.relaxed_srl;
            d["ao_trace"] = r.ao_trace;
            d["converged"] = r.converged;
            d["feasible"] = r.feasible;
            d["groups"] = band_groups(r.fc, r.N, fs);
            return d;
        },
        py::arg("l"), py::arg("u"), py::arg("fs"), py::arg("W"), py::arg("alpha1"), py::arg("alpha2"),
        py::arg("sigma2"), py::arg("sigma_p") = 1.0, py::arg("restarts") = 8, py::arg("seed") = 1);

    m.def(
        "baselines",
        [](std::vector<double> l, std::vector<double> u, std::vector<double> fs, double W, cplx alpha1, cplx alpha2,
           double sigma2, double sigma_p) {
            ConstraintSet cs{l, u, fs, W};
            auto model = scenario_of({}, {}, {}, alpha1, alpha2, sigma2, sigma_p, true, true);
            auto a = baseline_centered(cs, model);
            auto b = baseline_outer(cs, model);
            return py::make_tuple(design_dict(a.fc, a.N, a.srl, a.deb, a.feasible), design_dict(b.fc, b.N, b.srl, b.deb, b.feasible));
        },
        py::arg("l"), py::arg("u"), py::arg("fs"), py::arg("W"), py::arg("alpha1"), py::arg("alpha2"),
        py::arg("sigma2"), py::arg("sigma_p") = 1.0, "(centered, outer) baseline designs");
}
