#include "yosida/error.hpp"
#include "yosida/noise.hpp"
#include "yosida/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace yosida {

bool AssumptionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.pass; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

AssumptionCheck make(const std::string& name, double margin, double slack, const std::string& detail = "") {
    AssumptionCheck c;
    c.name = name;
    c.margin = margin + slack;
    c.pass = c.margin >= 0.0;
    c.detail = detail;
    return c;
}

std::vector<double> scalar_samples(const ScalarGraph& g, int samples, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> s = g.breakpoints();
    s.push_back(0.0);
    for (int i = 0; i < samples; ++i) {
        double mag = std::pow(10.0, 3.0 * U(rng));
        s.push_back(U(rng) < 0.0 ? -mag : mag);
        s.push_back(10.0 * U(rng));
    }
    return s;
}

Field random_field(const Grid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    double scale = std::pow(10.0, U(rng));
    Vec v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = scale * nd(rng);
    return Field(g, v);
}

}  // namespace

AssumptionReport validate_graph(const ScalarGraph& g, int samples, unsigned long long seed) {
    AssumptionReport rep;
    const GraphMeta& m = g.meta();
    auto issues = g.check();
    {
        AssumptionCheck c;
        c.name = "maximal_monotone";
        c.pass = issues.empty();
        for (const auto& s : issues) c.detail += (c.detail.empty() ? "" : "; ") + s;
        rep.checks.push_back(c);
    }
    std::mt19937_64 rng(seed);
    auto pts = scalar_samples(g, samples, rng);
    double coerc = std::numeric_limits<double>::infinity(), growth = coerc;
    for (double s : pts) {
        Interval I = g.eval(s);
        for (double x : {I.lo, I.hi}) {
            double lhs = s * x, rhs = m.c1 * std::pow(std::abs(s), m.p) - m.c2;
            coerc = std::min(coerc, (lhs - rhs) / std::max(1.0, std::abs(rhs)));
            double bound = m.growth * std::pow(std::abs(s), m.p - 1.0) + m.growth;
            growth = std::min(growth, (bound - std::abs(x)) / std::max(1.0, bound));
        }
    }
    auto c = make("coercive", coerc, 1e-12);
    if (m.c1 <= 0.0) {
        c.pass = false;
        c.detail = "no positive coercivity constant declared";
    }
    rep.checks.push_back(c);
    rep.checks.push_back(make("growth", growth, 1e-12));
    return rep;
}

AssumptionReport validate_assumptions(const MultiValuedOperator& op, const SingleValuedDrift& drift,
                                      const NoiseModel& noise, double horizon, int samples,
                                      unsigned long long seed) {
    AssumptionReport rep;
    for (auto c : validate_graph(op.graph(), 2 * samples, seed).checks) {
        c.name = "graph." + c.name;
        rep.checks.push_back(c);
    }
    const Grid& g = op.grid();
    const GelfandTriple& t = op.triple();
    const OperatorAssumptions& A = op.assumptions();
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> U01(0.0, 1.0);

    double mono = std::numeric_limits<double>::infinity();
    double coerc = mono, growth = mono;
    for (int k = 0; k < samples; ++k) {
        Field u = random_field(g, rng), v = random_field(g, rng);
        DualField au = apply_selection(op, u, U01(rng)), av = apply_selection(op, v, U01(rng));
        double pr = pairing(au - av, u - v);
        double scale = std::max(1.0, std::abs(pairing(au, u)) + std::abs(pairing(av, v)));
        mono = std::min(mono, pr / scale);

        DualField a0 = apply_minimal(op, u);
        double nv = t.norm_V(u), nh = t.norm_H(u);
        double lhs = pairing(a0, u), rhs = A.delta * std::pow(nv, A.alpha) - A.f_coercive;
        coerc = std::min(coerc, (lhs - rhs) / std::max(1.0, std::abs(lhs)));

        double dn = op_dual_norm(op, a0).upper;
        double g_lhs = std::pow(dn, A.alpha / (A.alpha - 1.0));
        double g_rhs = (A.f + A.C * std::pow(nv, A.alpha)) * (1.0 + std::pow(nh, A.beta));
        growth = std::min(growth, (g_rhs - g_lhs) / std::max(1.0, g_rhs));
    }
    rep.checks.push_back(make("H_A1", mono, 1e-9, "monotonicity on random selection pairs"));
    {
        auto c = make("H_A2", coerc, 1e-8, "coercivity with declared delta and f");
        if (!(A.delta > 0.0)) {
            c.pass = false;
            c.detail = "delta must be positive";
        }
        if (op.graph().meta().p != t.p) {
            c.pass = false;
            c.detail = "graph exponent differs from the triple exponent";
        }
        if (A.alpha != t.p) {
            c.pass = false;
            c.detail = "gauge alpha differs from the coercivity exponent p";
        }
        rep.checks.push_back(c);
    }
    rep.checks.push_back(make("H_A3", growth, 1e-8, "growth of the minimal section"));

    // drift B
    if (drift.kind == SingleValuedDrift::Kind::Zero) {
        rep.checks.push_back(make("H_B1", 0.0, 0.0, "zero drift"));
        rep.checks.push_back(make("H_B2", 0.0, 0.0, "zero drift"));
    } else {
        double b1 = std::numeric_limits<double>::infinity(), b2 = b1;
        const Reaction& r = drift.reaction;
        const double ex = (g.d + 2.0) / g.d;
        for (int k = 0; k < samples; ++k) {
            Field u = random_field(g, rng);
            DualField B = drift_B(drift, 0.0, u);
            double nh = lp_norm(g, u.values, 2.0);
            double lhs = pairing(B, u) + r.c_lower() * nh * nh + drift.forcing();
            b1 = std::min(b1, lhs / std::max(1.0, std::abs(pairing(B, u))));
            Vec gx = central_gradient(g, u.values, 0);
            Vec gy = g.d == 2 ? central_gradient(g, u.values, 1) : Vec::Zero(g.size());
            for (int i = 0; i < g.size(); ++i) {
                double xi[2] = {g.coord(i, 0), g.d == 2 ? g.coord(i, 1) : 0.0};
                double grad[2] = {gx[i], gy[i]};
                double val = std::abs(r(0.0, xi, u.values[i], grad));
                double zn = std::hypot(grad[0], grad[1]);
                double bound = r.c_growth() * (zn + std::pow(std::abs(u.values[i]), ex)) + r.f2();
                b2 = std::min(b2, (bound - val) / std::max(1.0, bound));
            }
        }
        rep.checks.push_back(make("H_B1", b1, 1e-9, "weak coercivity of -Delta + g"));
        rep.checks.push_back(make("H_B2", b2, 1e-12, "reaction growth |g| <= c|z| + c|u|^{(d+2)/d} + f2"));
    }

    // noise
    {
        AssumptionCheck c;
        c.name = "H_sigma";
        c.pass = true;
        for (const auto& m : noise.modes) c.pass = c.pass && std::isfinite(m.c) && m.gamma >= 0.0;
        c.detail = noise.K() == 0 ? "no noise modes" : "linear multiplicative modes";
        rep.checks.push_back(c);
    }
    {
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 64; ++k) {
            double tt = horizon * k / 64.0;
            worst = std::min(worst, (A.alpha - 1.0) * noise.h(tt) - drift.extinction_forcing());
        }
        bool decaying = std::all_of(noise.modes.begin(), noise.modes.end(),
                                    [](const NoiseModel::Mode& m) { return m.gamma > 0.0 || m.c == 0.0; });
        auto c = make("H_sigma*", worst, 0.0,
                      decaying ? "h integrable on [0,inf)" : "constant modes: h integrable on the finite horizon only");
        rep.checks.push_back(c);
    }
    return rep;
}

}  // namespace yosida
