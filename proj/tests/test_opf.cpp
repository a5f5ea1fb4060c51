#include <doctest.h>

#include <random>

#include "derflow/opf.hpp"
#include "derflow/feeder.hpp"
#include "derflow/admittance.hpp"
#include "derflow/powerflow.hpp"
#include "oracles.hpp"

using namespace derflow;
using Catch = doctest::Approx;

namespace {

OpfInstance random_instance(std::mt19937_64& rng, int ng = 3, int m = 4) {
    std::uniform_real_distribution<double> sens(-0.1, 0.1);
    std::uniform_real_distribution<double> off(0.98, 1.06);
    std::uniform_real_distribution<double> load(0.0, 0.05);
    OpfInstance inst;
    inst.Rg.resize(m, ng);
    inst.Bg.resize(m, ng);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < ng; ++c) {
            inst.Rg(r, c) = std::abs(sens(rng));
            inst.Bg(r, c) = std::abs(sens(rng));
        }
    inst.c.resize(m);
    for (int r = 0; r < m; ++r) inst.c(r) = off(rng);
    inst.pl_der.resize(ng);
    inst.ql_der.resize(ng);
    for (int i = 0; i < ng; ++i) {
        inst.pl_der(i) = load(rng);
        inst.ql_der(i) = load(rng);
    }
    for (int i = 0; i < ng; ++i) {
        Capability cap;
        cap.s = 0.08 + 0.04 * (i % 3);
        cap.p_min = 0.0;
        cap.p_av = 0.75 * cap.s;
        inst.caps.push_back(cap);
        inst.cost.terms.push_back({3.0, 1.0});
    }
    inst.reg = {1e-3, 1e-4, 0.2, 1e3, 1e3};
    return inst;
}

Eigen::VectorXd random_z(const OpfInstance& inst, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> up(-0.2, 0.2);
    std::uniform_real_distribution<double> dual(0.0, 5.0);
    Eigen::VectorXd z(inst.zdim());
    for (int i = 0; i < 2 * inst.ng(); ++i) z(i) = up(rng);
    for (int i = 2 * inst.ng(); i < inst.zdim(); ++i) z(i) = dual(rng);
    return inst.project_z(z);
}

OpfInstance feeder_instance(double load_scale, double pv_frac) {
    auto f = parse_feeder_file(oracles::bundled("ieee37.feeder"));
    auto adm = build_admittance(f);
    auto lin = build_linear_model(adm, f.slack_voltage);
    auto sens = slice_sensitivities(lin, f.monitored, f.der_nodes());
    Eigen::VectorXd lp = Eigen::VectorXd::Zero(f.n()), lq = Eigen::VectorXd::Zero(f.n());
    for (const auto& l : f.base_loads) {
        lp(l.node - 1) += load_scale * l.p;
        lq(l.node - 1) += load_scale * l.q;
    }
    OpfInstance inst;
    inst.Rg = sens.Rg;
    inst.Bg = sens.Bg;
    inst.c = constraint_offsets(sens, lp, lq);
    const int ng = static_cast<int>(f.ders.size());
    inst.pl_der.resize(ng);
    inst.ql_der.resize(ng);
    for (int i = 0; i < ng; ++i) {
        inst.pl_der(i) = lp(f.ders[i].node - 1);
        inst.ql_der(i) = lq(f.ders[i].node - 1);
        Capability cap;
        cap.s = f.ders[i].s_rating;
        cap.p_min = 0.0;
        cap.p_av = pv_frac * cap.s;
        inst.caps.push_back(cap);
        inst.cost.terms.push_back({3.0, 1.0});
    }
    inst.reg = {1e-3, 1e-4, 0.2, 1e3, 1e3};
    return inst;
}

}  // namespace

TEST_CASE("project_dual clamps to [0, D]") {
    CHECK(project_dual(-1.0, 5.0) == 0.0);
    CHECK(project_dual(3.0, 5.0) == 3.0);
    CHECK(project_dual(7.0, 5.0) == 5.0);
}

TEST_CASE("project_capability basics") {
    Capability cap{-0.5, 0.5, 1.0};

    SUBCASE("interior point is fixed") {
        Eigen::Vector2d x(0.2, 0.3);
        CHECK((project_capability(cap, x) - x).norm() == 0.0);
    }

    SUBCASE("radial projection onto the disk") {
        Eigen::Vector2d x(0.0, 2.0);
        Eigen::Vector2d p = project_capability(cap, x);
        CHECK(p(0) == Catch(0.0));
        CHECK(p(1) == Catch(1.0));
    }

    SUBCASE("empty set rejected") {
        Capability bad{0.6, 0.5, 1.0};
        CHECK_THROWS_AS(bad.validate(), OpfError);
    }
}

TEST_CASE("projection tracks the grid oracle, idempotent, non-expansive") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::uniform_real_distribution<double> su(0.3, 1.5);
    for (int trial = 0; trial < 300; ++trial) {
        Capability cap;
        cap.s = su(rng);
        cap.p_min = -0.8 * cap.s * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        cap.p_av = 0.9 * cap.s * std::uniform_real_distribution<double>(0.1, 1.0)(rng);
        if (cap.p_min > cap.p_av) std::swap(cap.p_min, cap.p_av);
        Eigen::Vector2d x(unif(rng), unif(rng));
        Eigen::Vector2d y(unif(rng), unif(rng));
        Eigen::Vector2d px = project_capability(cap, x);
        Eigen::Vector2d py = project_capability(cap, y);
        CHECK(cap.contains(px));
        // the grid oracle agrees in projection distance up to its resolution
        // (positions can differ along the arc where the objective is flat)
        const double res = std::max(cap.p_av - cap.p_min, 2.0 * cap.s) / 1999.0;
        Eigen::Vector2d gx = oracles::grid_projection(cap, x);
        CHECK((px - x).norm() <= (gx - x).norm() + 1e-12);
        CHECK((gx - x).norm() - (px - x).norm() <= 2.0 * res);
        // idempotence and non-expansiveness
        CHECK((project_capability(cap, px) - px).norm() <= 1e-15);
        CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
    }
}

TEST_CASE("g + gbar is the constant v_min - v_max") {
    std::mt19937_64 rng(5);
    auto inst = random_instance(rng);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd z = random_z(inst, rng);
        Eigen::VectorXd u = z.head(2 * inst.ng());
        Eigen::VectorXd s = inst.eval_g(u) + inst.eval_gbar(u);
        for (int n = 0; n < inst.m(); ++n)
            CHECK(s(n) == Catch(inst.v_min - inst.v_max).epsilon(1e-12));
    }
}

TEST_CASE("eval_g matches a brute-force loop") {
    std::mt19937_64 rng(6);
    auto inst = feeder_instance(0.45, 0.9);
    Eigen::VectorXd z = random_z(inst, rng);
    Eigen::VectorXd u = z.head(2 * inst.ng());
    Eigen::VectorXd g = inst.eval_g(u);
    for (int n = 0; n < inst.m(); ++n) {
        double acc = 0.0;
        for (int i = 0; i < inst.ng(); ++i) {
            acc += inst.Rg(n, i) * (u(2 * i) - inst.pl_der(i));
            acc += inst.Bg(n, i) * (u(2 * i + 1) - inst.ql_der(i));
        }
        CHECK(g(n) == Catch(inst.v_min - inst.c(n) - acc).epsilon(1e-12));
    }
}

TEST_CASE("g vanishes when the predicted magnitude sits on the lower limit") {
    OpfInstance inst;
    inst.Rg.resize(1, 1);
    inst.Rg << 0.05;
    inst.Bg.resize(1, 1);
    inst.Bg << 0.0;
    inst.c.resize(1);
    inst.c << 1.0;
    inst.pl_der = Eigen::VectorXd::Zero(1);
    inst.ql_der = Eigen::VectorXd::Zero(1);
    inst.caps.push_back({-10.0, 10.0, 20.0});
    inst.cost.terms.push_back({1.0, 1.0});
    // rho = 1.0 + 0.05 P = v_min  =>  P = -1
    Eigen::VectorXd u(2);
    u << (inst.v_min - 1.0) / 0.05, 0.0;
    CHECK(inst.eval_g(u)(0) == Catch(0.0).epsilon(1e-14));
}

TEST_CASE("primal gradient closed forms") {
    std::mt19937_64 rng(7);
    auto inst = random_instance(rng);

    SUBCASE("multiplier-free case is the cost gradient") {
        OpfInstance plain = inst;
        plain.reg.nu = 0.0;
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(plain.m());
        for (int i = 0; i < plain.ng(); ++i) {
            Eigen::Vector2d ui(0.03, -0.01);
            Eigen::Vector2d g = plain.grad_u_lagrangian(i, ui, zero, zero);
            const auto& t = plain.cost.terms[i];
            CHECK(g(0) == Catch(-2.0 * t.cp * (plain.caps[i].p_av - ui(0))).epsilon(1e-14));
            CHECK(g(1) == Catch(2.0 * t.cq * ui(1)).epsilon(1e-14));
        }
    }

    SUBCASE("linear term only") {
        OpfInstance lin = inst;
        lin.reg.nu = 0.0;
        for (auto& t : lin.cost.terms) t = {0.0, 0.0};
        for (auto& cap : lin.caps) cap.p_av = 0.0;  // keeps grad_f zero at u=0
        Eigen::VectorXd gamma(lin.m()), mu(lin.m());
        std::uniform_real_distribution<double> d(0.0, 2.0);
        for (int n = 0; n < lin.m(); ++n) {
            gamma(n) = d(rng);
            mu(n) = d(rng);
        }
        for (int i = 0; i < lin.ng(); ++i) {
            Eigen::Vector2d g = lin.grad_u_lagrangian(i, Eigen::Vector2d::Zero(), gamma, mu);
            CHECK(g(0) == Catch(lin.Rg.col(i).dot(mu - gamma)).epsilon(1e-12));
            CHECK(g(1) == Catch(lin.Bg.col(i).dot(mu - gamma)).epsilon(1e-12));
        }
    }
}

TEST_CASE("gradient matches finite differences of the saddle value") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        auto inst = random_instance(rng);
        Eigen::VectorXd z = random_z(inst, rng);
        Eigen::VectorXd gamma = z.segment(2 * inst.ng(), inst.m());
        Eigen::VectorXd mu = z.tail(inst.m());
        Eigen::VectorXd u = z.head(2 * inst.ng());
        auto value = [&](const Eigen::VectorXd& uu) {
            return inst.lagrangian_value(uu, gamma, mu);
        };
        Eigen::VectorXd fd = oracles::finite_difference_gradient(value, u);
        for (int i = 0; i < inst.ng(); ++i) {
            Eigen::Vector2d an = inst.grad_u_lagrangian(i, u.segment<2>(2 * i), gamma, mu);
            Eigen::Vector2d fdi = fd.segment<2>(2 * i);
            const double scale = std::max(1.0, fdi.norm());
            CHECK((an - fdi).norm() / scale <= 1e-6);
        }
    }
}

TEST_CASE("lagrangian plug-in values") {
    std::mt19937_64 rng(9);
    auto inst = random_instance(rng);
    Eigen::VectorXd zero_m = Eigen::VectorXd::Zero(inst.m());
    Eigen::VectorXd zero_u = Eigen::VectorXd::Zero(2 * inst.ng());

    SUBCASE("all-zero point reduces to the curtailment cost") {
        double expect = 0.0;
        for (int i = 0; i < inst.ng(); ++i)
            expect += inst.cost.terms[i].cp * inst.caps[i].p_av * inst.caps[i].p_av;
        CHECK(inst.lagrangian_value(zero_u, zero_m, zero_m) == Catch(expect).epsilon(1e-12));
    }

    SUBCASE("zero duals drop every constraint term") {
        Eigen::VectorXd u = random_z(inst, rng).head(2 * inst.ng());
        double expect = 0.0;
        for (int i = 0; i < inst.ng(); ++i) {
            const auto& t = inst.cost.terms[i];
            const double p = u(2 * i), q = u(2 * i + 1);
            expect += t.cq * q * q + t.cp * (inst.caps[i].p_av - p) * (inst.caps[i].p_av - p);
            expect += 0.5 * inst.reg.nu * (p * p + q * q);
        }
        CHECK(inst.lagrangian_value(u, zero_m, zero_m) == Catch(expect).epsilon(1e-12));
    }
}

TEST_CASE("saddle map is strongly monotone and Lipschitz at the stated constants") {
    std::mt19937_64 rng(10);
    auto inst = feeder_instance(0.45, 0.9);
    const double eta = std::min(inst.reg.nu, inst.reg.eps);
    const double G = inst.constraint_jacobian_norm();
    const double L = inst.cost.lipschitz();
    const double lphi = std::sqrt(std::pow(L + inst.reg.nu + 2.0 * G, 2) +
                                  2.0 * std::pow(G + inst.reg.eps, 2));
    double worst_mono = std::numeric_limits<double>::infinity();
    double worst_lip = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        Eigen::VectorXd z1 = random_z(inst, rng);
        Eigen::VectorXd z2 = random_z(inst, rng);
        const double d2 = (z1 - z2).squaredNorm();
        if (d2 < 1e-18) continue;
        Eigen::VectorXd dphi = inst.phi_map(z1) - inst.phi_map(z2);
        worst_mono = std::min(worst_mono, dphi.dot(z1 - z2) / d2);
        worst_lip = std::max(worst_lip, dphi.norm() / std::sqrt(d2));
    }
    CHECK(worst_mono >= eta - 1e-12);
    CHECK(worst_lip <= lphi + 1e-9);
}

TEST_CASE("oracle: inactive constraints give the closed-form minimizer") {
    std::mt19937_64 rng(11);
    auto inst = random_instance(rng, 2, 2);
    // slack limits everywhere: huge feasibility margins
    inst.c.setConstant(1.0);
    inst.Rg.setConstant(1e-6);
    inst.Bg.setConstant(1e-6);
    auto sp = solve_saddle_oracle(inst, 1e-12, 2000000);
    CHECK(sp.gamma.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(sp.mu.cwiseAbs().maxCoeff() <= 1e-9);
    for (int i = 0; i < inst.ng(); ++i) {
        const auto& t = inst.cost.terms[i];
        const double p_star =
            2.0 * t.cp * inst.caps[i].p_av / (2.0 * t.cp + inst.reg.nu);
        CHECK(sp.u(2 * i) == Catch(p_star).epsilon(1e-6));
        CHECK(std::abs(sp.u(2 * i + 1)) <= 1e-8);
    }
}

TEST_CASE("oracle: restarts agree and the fixed point is certified") {
    auto inst = feeder_instance(0.45, 0.9);
    inst.reg = {0.5, 0.5, 0.008, 10.0, 10.0};
    const double tol = 1e-11;
    auto sp1 = solve_saddle_oracle(inst, tol, 2000000);

    Eigen::VectorXd other = Eigen::VectorXd::Zero(inst.zdim());
    for (int i = 0; i < inst.ng(); ++i) other(2 * i) = inst.caps[i].p_av;
    other = inst.project_z(other);
    auto sp2 = solve_saddle_oracle(inst, tol, 2000000, &other);

    const double eta = std::min(inst.reg.nu, inst.reg.eps);
    const double G = inst.constraint_jacobian_norm();
    const double L = inst.cost.lipschitz();
    const double lphi = std::sqrt(std::pow(L + inst.reg.nu + 2.0 * G, 2) +
                                  2.0 * std::pow(G + inst.reg.eps, 2));
    const double rho = std::sqrt(1.0 - 2.0 * eta * inst.reg.alpha +
                                 inst.reg.alpha * inst.reg.alpha * lphi * lphi);
    REQUIRE(rho < 1.0);
    CHECK((sp1.z() - sp2.z()).norm() <= 10.0 * tol / (1.0 - rho));

    Eigen::VectorXd zs = sp1.z();
    Eigen::VectorXd stepped = inst.project_z(zs - inst.reg.alpha * inst.phi_map(zs));
    CHECK((zs - stepped).norm() <= tol);
}

TEST_CASE("oracle: overvoltage instance activates upper-limit multipliers") {
    auto inst = feeder_instance(0.45, 0.9);
    inst.reg.d_gamma = inst.reg.d_mu = 10.0;
    // confirm the uncontrolled point actually violates the upper limit
    Eigen::VectorXd u0(2 * inst.ng());
    for (int i = 0; i < inst.ng(); ++i) {
        u0(2 * i) = inst.caps[i].p_av;
        u0(2 * i + 1) = 0.0;
    }
    REQUIRE(inst.eval_gbar(u0).maxCoeff() > 0.0);
    auto sp = solve_saddle_oracle(inst, 1e-10, 2000000);
    CHECK(sp.mu.maxCoeff() > 0.0);
    CHECK(sp.gamma.maxCoeff() <= 1e-8);
    for (int i = 0; i < inst.ng(); ++i)
        CHECK(inst.caps[i].contains(sp.u.segment<2>(2 * i), 1e-10));
}

TEST_CASE("cost Lipschitz constant is 2 max(cp, cq)") {
    CostModel cm;
    cm.terms = {{3.0, 1.0}, {0.5, 2.5}};
    CHECK(cm.lipschitz() == Catch(6.0));
}

TEST_CASE("interval constraint bounds dominate sampled values") {
    std::mt19937_64 rng(13);
    auto inst = feeder_instance(0.45, 0.9);
    double kl, ku;
    inst.constraint_value_bounds(kl, ku);
    double max_g = 0.0, max_gbar = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        Eigen::VectorXd u(2 * inst.ng());
        for (int i = 0; i < inst.ng(); ++i) {
            std::uniform_real_distribution<double> pd(inst.caps[i].p_min, inst.caps[i].p_av);
            std::uniform_real_distribution<double> qd(-inst.caps[i].s, inst.caps[i].s);
            u(2 * i) = pd(rng);
            u(2 * i + 1) = qd(rng);
        }
        max_g = std::max(max_g, inst.eval_g(u).norm());
        max_gbar = std::max(max_gbar, inst.eval_gbar(u).norm());
    }
    CHECK(kl >= max_g);
    CHECK(ku >= max_gbar);
}
