#include "gldual/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include "gldual/config.hpp"
#include "gldual/optcrit.hpp"
#include "gldual/proxdual.hpp"
#include "gldual/sampling.hpp"
#include "gldual/scenario.hpp"
#include "gldual/tensordual.hpp"

namespace gldual {

namespace {

struct Instance {
    std::string name;
    Grid grid;
    ModelParams params;
    Field init;
};

Instance make_instance(std::string name, int nodes, double gamma, double beta, double K, double f, double init) {
    Instance in{std::move(name), build_grid({1, 1.0, nodes}), {}, {}};
    in.params.gamma = gamma;
    in.params.beta = beta;
    in.params.K = K;
    in.params.f = in.grid.constant(f);
    in.init = in.grid.constant(init);
    return in;
}

/// Instances whose critical points include local minima and local maxima
/// with the dual triple inside B*.
std::vector<Instance> gap_instances() {
    return {
        make_instance("N=3 f=0", 3, 1.0, 1.0, 10.0, 0.0, 1.0),
        make_instance("N=3 f=0.5", 3, 1.0, 1.0, 10.0, 0.5, 1.0),
        make_instance("N=31 gamma=0.05 f=0.5", 31, 0.05, 1.0, 10.0, 0.5, 1.0),
        make_instance("N=3 beta=40 K=200", 3, 1.0, 40.0, 200.0, 0.0, 0.0),
        make_instance("N=31 gamma=0.01 beta=25 K=120", 31, 0.01, 25.0, 120.0, 0.0, 0.0),
    };
}

struct FoundPoint {
    const Instance* instance;
    CriticalPoint point;
};

/// Newton from the instance's seed start plus random smooth starts; distinct
/// local minima and maxima only.
std::vector<FoundPoint> multistart_points(const std::vector<Instance>& instances, int nstarts) {
    std::vector<FoundPoint> out;
    Rng rng(2024);
    for (const Instance& in : instances) {
        std::vector<Field> starts{in.init};
        for (int k = 0; k < nstarts; ++k) {
            starts.push_back(random_smooth_field(in.grid, rng, 1.2 * std::sqrt(in.params.beta)));
        }
        std::vector<Field> seen;
        for (const Field& s : starts) {
            CriticalPoint cp;
            try {
                cp = newton(in.params, in.grid, s, 1e-12, 200);
            } catch (const Error&) {
                continue;
            }
            if (cp.classification != Classification::LocalMin && cp.classification != Classification::LocalMax) {
                continue;
            }
            const bool dup = std::any_of(seen.begin(), seen.end(),
                                         [&](const Field& f) { return (f - cp.u0).norm_inf() < 1e-6; });
            if (dup) continue;
            seen.push_back(cp.u0);
            const DualTriple t = build_dual_triple(in.params, in.grid, cp.u0);
            if (!in_Bstar(in.params, in.grid, t.v0star)) continue;
            out.push_back({&in, cp});
        }
    }
    return out;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

double worst(const std::vector<CurvatureRow>& rows) {
    double w = 0.0;
    for (const CurvatureRow& r : rows) w = std::max(w, r.rel_mismatch);
    return w;
}

/// The gap, stationarity and curvature checks applied to one critical point.
struct Thm1Check {
    bool gap_ok = true;
    bool curvature_ok = true;
    double gap_ratio = 0.0;  // gap / allowed
    double grad = 0.0;
    double nested = 0.0;
    double j8 = 0.0;
};

Thm1Check check_thm1(const ModelParams& params, const Grid& grid, const Field& u0) {
    const Thm1Result r = verify_thm1(params, grid, u0);
    Thm1Check c;
    c.gap_ratio = r.gap / (1e-9 * (1.0 + std::abs(r.J)));
    c.grad = r.dual_grad_norm;
    c.gap_ok = r.in_bstar && c.gap_ratio <= 1.0 && c.grad <= 1e-8;
    if (r.point.classification == Classification::LocalMin) {
        c.nested = worst(r.nested_rows);
        c.j8 = worst(r.j8_pp_rows);
        c.curvature_ok = !r.nested_rows.empty() && c.nested <= 5e-3 && c.j8 <= 1e-3;
    }
    return c;
}

// -- Independent conjugation by coordinate-wise golden-section search. --

double golden_max(const std::function<double(double)>& f, double lo, double hi) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

/// sup over x of a concave function by cyclic coordinate ascent, each
/// coordinate maximised over [x_i - width, x_i + width].
double coordinate_sup(const std::function<double(const std::vector<double>&)>& phi, std::vector<double> x,
                      double width) {
    double prev = phi(x);
    for (int sweep = 0; sweep < 5000; ++sweep) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            auto line = [&](double t) {
                std::vector<double> y = x;
                y[i] = t;
                return phi(y);
            };
            x[i] = golden_max(line, x[i] - width, x[i] + width);
        }
        const double cur = phi(x);
        if (std::abs(cur - prev) <= 1e-15 * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return phi(x);
}

/// sup_{u, y} <w, u> - 1/2 <(L + K + eps) u, u> + <v0*, y - u^2> - alpha/2 int (y - beta)^2
/// with w = v* + K p, in the unweighted nodal form scaled by the quadrature weight.
double brute_Gstar(const ModelParams& params, const Grid& grid, const DualTriple& t) {
    const std::size_t n = grid.node_count();
    const SymOp L = neg_laplacian(params, grid);
    const Field w = t.vstar + params.K * t.p;
    const double W = grid.quadrature_weight();
    auto phi = [&](const std::vector<double>& x) {
        const Field u(std::vector<double>(x.begin(), x.begin() + static_cast<long>(n)));
        const Field lu = L.apply(u);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double y = x[n + i];
            s += w[i] * u[i] - 0.5 * (lu[i] + (params.K + params.eps) * u[i]) * u[i] +
                 t.v0star[i] * (y - u[i] * u[i]) - 0.5 * params.alpha * (y - params.beta) * (y - params.beta);
        }
        return W * s;
    };
    return coordinate_sup(phi, std::vector<double>(2 * n, 0.0), 50.0);
}

/// Nodewise: sup_x <v, x> - 1/2 x^T (K - 2 S) x plus, for each of the four
/// index pairs, inf_y alpha/8 y^2 - s_ij (y + beta).
double brute_Gstar_t(const ModelParams& params, const Grid& grid, const KMat& km, const TensorDual& t) {
    double total = 0.0;
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        const double a = km.K - 2.0 * t.s11[i];
        const double b = km.K12 - 2.0 * t.s12[i];
        const double d = km.K - 2.0 * t.s22[i];
        auto phi = [&](const std::vector<double>& x) {
            return t.v1[i] * x[0] + t.v2[i] * x[1] - 0.5 * (a * x[0] * x[0] + 2.0 * b * x[0] * x[1] + d * x[1] * x[1]);
        };
        double node = coordinate_sup(phi, {0.0, 0.0}, 50.0);
        for (const double s : {t.s11[i], t.s12[i], t.s12[i], t.s22[i]}) {
            auto psi = [&](double y) { return -(0.125 * params.alpha * y * y - s * (y + params.beta)); };
            const double y = golden_max(psi, -1e3, 1e3);
            node -= psi(y);
        }
        total += node;
    }
    return grid.quadrature_weight() * total;
}

// -- The criteria. --

CriterionResult criterion_gap() {
    CriterionResult c{1, "proximal dual: zero gap and dual stationarity at local extrema", true, {}, 0.0};
    const auto instances = gap_instances();
    const auto points = multistart_points(instances, 6);
    int mins = 0, maxs = 0;
    double worst_ratio = 0.0, worst_grad = 0.0;
    for (const FoundPoint& fp : points) {
        const Thm1Check k = check_thm1(fp.instance->params, fp.instance->grid, fp.point.u0);
        c.pass = c.pass && k.gap_ok;
        worst_ratio = std::max(worst_ratio, k.gap_ratio);
        worst_grad = std::max(worst_grad, k.grad);
        (fp.point.classification == Classification::LocalMin ? mins : maxs) += 1;
    }
    c.pass = c.pass && points.size() >= 5 && mins > 0 && maxs > 0;
    c.detail = fmt("%.0f points (%.0f min, ", static_cast<double>(points.size()), mins) +
               fmt("%.0f max); worst gap/allowed %.3g, worst dual grad %.3g", maxs, worst_ratio, worst_grad);
    return c;
}

CriterionResult criterion_stationarity() {
    CriterionResult c{2, "dual stationarity at arbitrary critical points", true, {}, 0.0};
    const auto instances = gap_instances();
    Rng rng(99);
    int found = 0, inside = 0, outside = 0, tries = 0;
    double worst_grad = 0.0;
    while (found < 20 && tries < 400) {
        const Instance& in = instances[static_cast<std::size_t>(tries++) % instances.size()];
        CriticalPoint cp;
        try {
            cp = newton(in.params, in.grid, random_smooth_field(in.grid, rng, 1.5 * std::sqrt(in.params.beta)),
                        1e-12, 200);
        } catch (const Error&) {
            continue;
        }
        ++found;
        const DualTriple t = build_dual_triple(in.params, in.grid, cp.u0);
        if (!in_Bstar(in.params, in.grid, t.v0star)) {
            ++outside;
            continue;
        }
        ++inside;
        const double g = grad_Jstar(in.params, in.grid, t).norm();
        worst_grad = std::max(worst_grad, g);
        c.pass = c.pass && g <= 1e-8;
    }
    c.pass = c.pass && found == 20 && inside > 0;
    c.detail = fmt("%.0f critical points, %.0f in B*, ", found, inside) +
               fmt("%.0f outside B* (reported, not checked); worst dual grad %.3g", outside, worst_grad);
    return c;
}

CriterionResult criterion_curvature() {
    CriterionResult c{3, "nested dual curvature matches the predicted quadratic forms", true, {}, 0.0};
    const auto instances = gap_instances();
    const auto points = multistart_points(instances, 6);
    int mins = 0;
    double worst_nested = 0.0, worst_j8 = 0.0;
    for (const FoundPoint& fp : points) {
        if (fp.point.classification != Classification::LocalMin) continue;
        ++mins;
        const Thm1Check k = check_thm1(fp.instance->params, fp.instance->grid, fp.point.u0);
        c.pass = c.pass && k.curvature_ok;
        worst_nested = std::max(worst_nested, k.nested);
        worst_j8 = std::max(worst_j8, k.j8);
    }
    c.pass = c.pass && mins > 0;
    c.detail = fmt("%.0f local minima; worst relative mismatch J3 %.3g (limit 5e-3), J8_pp %.3g (limit 1e-3)",
                   mins, worst_nested, worst_j8);
    return c;
}

CriterionResult criterion_derivatives() {
    CriterionResult c{4, "gradient and Hessian against finite differences", true, {}, 0.0};
    const auto instances = gap_instances();
    Rng rng(4);
    double worst_g = 0.0, worst_h = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Instance& in = instances[static_cast<std::size_t>(k) % instances.size()];
        const Field u = random_smooth_field(in.grid, rng, 1.5 * std::sqrt(in.params.beta));
        Field d = random_normal_field(in.grid, rng, 1.0);
        d *= 1.0 / d.norm2();
        const double W = in.grid.quadrature_weight();
        auto J = [&](double s) { return energy_J(in.params, in.grid, u + s * d); };

        const double hg = 1e-5 * (1.0 + u.norm_inf());
        const double fd = (J(hg) - J(-hg)) / (2.0 * hg);
        const double pred = W * dot(grad_J(in.params, in.grid, u), d);
        worst_g = std::max(worst_g, std::abs(fd - pred) / std::max(std::abs(pred), 1e-6));

        const double hh = 1e-3;
        const double sd = (J(hh) - 2.0 * J(0.0) + J(-hh)) / (hh * hh);
        const double hpred = W * dot(hess_J(in.params, in.grid, u).apply(d), d);
        worst_h = std::max(worst_h, std::abs(sd - hpred) / std::max(std::abs(hpred), 1e-6));
    }
    c.pass = worst_g <= 1e-6 && worst_h <= 1e-5;
    c.detail = fmt("50 fields; worst relative error gradient %.3g (limit 1e-6), Hessian %.3g (limit 1e-5)",
                   worst_g, worst_h);
    return c;
}

CriterionResult criterion_prox() {
    CriterionResult c{5, "proximal iteration descends and reaches a critical point", true, {}, 0.0};
    std::vector<Instance> configs = {
        make_instance("N=3 f=0.5", 3, 1.0, 1.0, 10.0, 0.5, 0.0),
        make_instance("N=31 gamma=0.05 f=0.5", 31, 0.05, 1.0, 10.0, 0.5, 0.0),
        make_instance("N=31 gamma=0.01 beta=4", 31, 0.01, 4.0, 10.0, 0.0, 0.0),
    };
    configs[2].params.f = parse_field("sin:0.3", configs[2].grid);
    Rng rng(5);
    int runs = 0, failures = 0;
    double worst_rise = -std::numeric_limits<double>::infinity(), worst_grad = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Instance& in = configs[static_cast<std::size_t>(k) % configs.size()];
        ++runs;
        try {
            const ProxResult r =
                prox_iterate(in.params, in.grid, random_smooth_field(in.grid, rng, 2.0), 1e-9, 20000);
            for (std::size_t i = 1; i < r.energy_trace.size(); ++i) {
                worst_rise = std::max(worst_rise, r.energy_trace[i] - r.energy_trace[i - 1]);
            }
            const double g = grad_J(in.params, in.grid, r.point.u0).norm2();
            worst_grad = std::max(worst_grad, g);
            if (g > 1e-6) ++failures;
        } catch (const Error&) {
            ++failures;
        }
    }
    c.pass = failures == 0 && worst_rise <= 1e-12;
    c.detail = fmt("%.0f runs, %.0f failures; largest per-step rise %.3g (limit 1e-12), ", runs, failures,
                   worst_rise) +
               fmt("worst final grad %.3g (limit 1e-6)", worst_grad);
    return c;
}

Instance convex_instance() {
    Instance in = make_instance("N=31 gamma=0.001 beta=30 K=70", 31, 0.001, 30.0, 70.0, 0.5, std::sqrt(30.0));
    return in;
}

CriterionResult criterion_sign_align() {
    CriterionResult c{6, "sign alignment never raises J; convexity probe tally", true, {}, 0.0};
    const Instance in = convex_instance();
    const Thm2Result r = verify_thm2(in.params, in.grid, 1000, 200, 6);
    c.pass = r.sign_align_samples == 1000 && r.max_sign_align_increase <= 1e-12;
    std::ostringstream os;
    os << r.sign_align_samples << " fields, max J increase " << fmt("%.3g", r.max_sign_align_increase)
       << "; probe " << r.probe.passes << "/" << r.probe.combinations << " combinations stayed in A+ and B+ ("
       << r.probe.pairs << " pairs, hypothesis margin " << fmt("%.4g", r.hypothesis_margin) << ")";
    for (const ConvexityCounterexample& ce : r.probe.counterexamples) {
        os << "\n      counterexample lambda=" << fmt("%.1f", ce.lambda)
           << " min_eig=" << fmt("%.17g", ce.min_eig_hess) << " u1=[";
        for (std::size_t i = 0; i < ce.u1.size(); ++i) os << (i ? " " : "") << fmt("%.17g", ce.u1[i]);
        os << "] u2=[";
        for (std::size_t i = 0; i < ce.u2.size(); ++i) os << (i ? " " : "") << fmt("%.17g", ce.u2[i]);
        os << "]";
    }
    c.detail = os.str();
    return c;
}

CriterionResult criterion_weak_duality() {
    CriterionResult c{7, "global optimality: weak duality and zero gap", true, {}, 0.0};
    const Instance in = convex_instance();
    const CriticalPoint cp = newton(in.params, in.grid, in.init, 1e-12, 200);
    const Thm3Result r = verify_thm3(in.params, in.grid, cp.u0, 200, 7);
    c.pass = r.weak_duality_samples == 200 && r.min_weak_duality_margin >= -1e-8 && r.gap <= 1e-7;
    c.detail = fmt("200 samples, min J* - best primal %.4g (limit -1e-8); gap %.3g (limit 1e-7)",
                   r.min_weak_duality_margin, r.gap);
    return c;
}

CriterionResult criterion_tensor() {
    CriterionResult c{8, "tensor dual: saddle point, memberships and curvature signs", true, {}, 0.0};
    std::ostringstream os;
    for (const int n : {3, 31}) {
        const Grid grid = build_grid({1, 1.0, n});
        ModelParams p;
        p.K = 100.0;
        p.K12 = 10.0;
        p.f = grid.constant(0.5);
        const KMat km{p.K, p.K12};
        const Thm4Result r = verify_thm4(p, grid, km, std::nullopt);
        const double g = grad_J(p, grid, r.saddle.u0).norm2();
        const bool ok = r.saddle.residual <= 1e-8 && g <= 1e-6 && std::abs(r.gap) <= 1e-6 && r.saddle.in_dstar &&
                        r.saddle.in_bstar && r.saddle.in_cstar && r.saddle.in_uhat &&
                        r.diag_equality_error <= 1e-8 && r.min_vstar_curvature >= -1e-6 &&
                        r.max_v0_curvature <= 1e-6;
        c.pass = c.pass && ok;
        os << (n == 3 ? "" : "; ") << "N=" << n << fmt(": residual %.2g, grad_J %.2g, gap %.2g", r.saddle.residual, g, std::abs(r.gap))
           << ", D*/B*/C*/U " << r.saddle.in_dstar << r.saddle.in_bstar << r.saddle.in_cstar << r.saddle.in_uhat
           << fmt(", curvature v* >= %.3g, v0* <= %.3g", r.min_vstar_curvature, r.max_v0_curvature);
    }
    c.detail = os.str();
    return c;
}

CriterionResult criterion_conjugacy() {
    CriterionResult c{9, "closed-form conjugates against brute-force conjugation", true, {}, 0.0};
    Rng rng(9);
    double worst = 0.0;
    int cases = 0;
    for (const int n : {1, 2, 3, 4}) {
        const Grid grid = build_grid({1, 1.0, n});
        ModelParams p;
        p.f = grid.constant(0.5);
        for (int k = 0; k < 3; ++k) {
            DualTriple t{random_normal_field(grid, rng, 1.0), random_normal_field(grid, rng, 0.5),
                         random_normal_field(grid, rng, 0.3)};
            if (!in_Bstar(p, grid, t.v0star)) continue;
            const double a = eval_Gstar(p, grid, t);
            worst = std::max(worst, std::abs(a - brute_Gstar(p, grid, t)) / (1.0 + std::abs(a)));
            ++cases;
        }
        ModelParams q = p;
        q.K = 100.0;
        q.K12 = 10.0;
        const KMat km{q.K, q.K12};
        for (int k = 0; k < 3; ++k) {
            TensorDual t{random_normal_field(grid, rng, 3.0), random_normal_field(grid, rng, 3.0), grid.zeros(),
                         grid.zeros(), grid.zeros()};
            std::uniform_real_distribution<double> unif(-0.9 * km.K12 / 4.0, 0.9 * km.K12 / 4.0);
            for (Field* s : {&t.s11, &t.s12, &t.s22}) {
                for (double& v : *s) v = unif(rng);
            }
            const double a = eval_Gstar_t(q, grid, km, t);
            worst = std::max(worst, std::abs(a - brute_Gstar_t(q, grid, km, t)) / (1.0 + std::abs(a)));
            ++cases;
        }
    }
    c.pass = worst <= 1e-7 && cases >= 16;
    c.detail = fmt("%.0f cases on N<=4; worst relative mismatch %.3g (limit 1e-7)", cases, worst);
    return c;
}

CriterionResult criterion_failure_mode() {
    CriterionResult c{10, "beta=10: naive dual is indefinite, proximal dual still verifies", true, {}, 0.0};
    Instance in = make_instance("N=3 beta=10", 3, 1.0, 10.0, 10.0, 0.0, 0.0);
    const NaiveDualDiagnosis d = naive_dual_curvature(in.params, in.grid, in.init);
    std::ostringstream os;
    os << "naive operator " << to_string(d.definiteness) << fmt(" [%.4g, %.4g]", d.min_eig, d.max_eig);
    c.pass = d.definiteness == Definiteness::Indefinite;

    // u = 0 is critical for f = 0; the well point comes from Newton.
    std::vector<Field> points{in.init};
    points.push_back(newton(in.params, in.grid, in.grid.constant(std::sqrt(10.0)), 1e-12, 200).u0);
    for (const Field& u0 : points) {
        ModelParams p = in.params;
        // K must exceed convexity_K and keep the triple in B*.
        const double a_min = min_eig(add_diag(neg_laplacian(p, in.grid), [&] {
            Field w(u0.size());
            for (std::size_t i = 0; i < u0.size(); ++i) w[i] = 2.0 * p.alpha * (u0[i] * u0[i] - p.beta) + p.eps;
            return w;
        }()));
        p.K = std::ceil(std::max({convexity_K(p, in.grid, u0), -2.0 * a_min, 0.0}) + 5.0);
        const Thm1Check k = check_thm1(p, in.grid, u0);
        c.pass = c.pass && k.gap_ok && k.curvature_ok;
        os << "; " << to_string(classify(p, in.grid, u0)) << fmt(" at K=%.0f: gap/allowed %.3g, dual grad %.3g",
                                                                  p.K, k.gap_ratio, k.grad);
    }
    c.detail = os.str();
    return c;
}

CriterionResult criterion_determinism() {
    CriterionResult c{11, "fixed seed gives byte-identical JSON", true, {}, 0.0};
    const std::string text =
        "dim=1\nextent=1\nnodes=31\ngamma=0.05\nalpha=1\nbeta=1\nK=10\neps=0.1\nf=const:0.5\ninit=const:1\n"
        "task=verify-thm1\nseed=42\n";
    const Scenario s = parse_config(text);
    const std::string a = to_json(run_scenario(s));
    const std::string b = to_json(run_scenario(s));
    c.pass = a == b;
    c.detail = fmt("%.0f bytes, identical=%.0f", static_cast<double>(a.size()), a == b);
    return c;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream& out) {
    const std::vector<CriterionResult (*)()> criteria = {
        criterion_gap,         criterion_stationarity, criterion_curvature,  criterion_derivatives,
        criterion_prox,        criterion_sign_align,   criterion_weak_duality, criterion_tensor,
        criterion_conjugacy,   criterion_failure_mode, criterion_determinism,
    };
    std::vector<CriterionResult> results;
    for (auto* run : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = run();
        } catch (const Error& e) {
            r.id = static_cast<int>(results.size()) + 1;
            r.title = "criterion raised an error";
            r.pass = false;
            r.detail = std::string(to_string(e.kind())) + ": " + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.id == 1 && r.seconds >= 10.0) {
            r.pass = false;
            r.detail += " (runtime over 10 s)";
        }
        out << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << ": " << r.title << " | " << r.detail
            << fmt(" (%.2f s)", r.seconds) << "\n";
        out.flush();
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace gldual
