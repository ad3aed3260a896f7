#include "fairdag/kkt.hpp"

#include <stdexcept>

namespace fairdag {

namespace {

std::string edge_label(const BipartiteRateGraph& g, std::size_t e) {
    return "edge (" + std::to_string(g.left[g.edges[e].left]) + "," + std::to_string(g.right[g.edges[e].right]) + ")";
}

std::string job_label(JobId id) { return "job " + std::to_string(id); }

}  // namespace

std::vector<bool> active_right(const BipartiteRateGraph& g, const RateSolution& sol) {
    std::vector<bool> active(g.right.size(), false);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (sol.L[g.edges[e].left] < 1) active[g.edges[e].right] = true;
    }
    return active;
}

AuditReport kkt_audit(const BipartiteRateGraph& g, const RateSolution& sol, const std::vector<Rational>& w,
                      double tol) {
    if (sol.z.size() != g.edges.size() || sol.nu.size() != g.edges.size() || sol.L.size() != g.left.size() ||
        sol.theta.size() != g.left.size() || sol.R.size() != g.right.size() || w.size() != g.right.size()) {
        throw std::invalid_argument("kkt_audit: solution does not match graph");
    }

    CheckBuilder left_sum("left_flow_conservation", tol);
    CheckBuilder right_sum("right_flow_conservation", tol);
    CheckBuilder nonneg("edge_nonnegativity", tol);
    CheckBuilder cap("rate_cap", tol);
    CheckBuilder budget("machine_budget", tol);
    CheckBuilder positive("positive_virtual_rate", tol);
    CheckBuilder stationarity("stationarity", tol);
    CheckBuilder slack_theta("slackness_theta", tol);
    CheckBuilder slack_eta("slackness_eta", tol);
    CheckBuilder slack_nu("slackness_nu", tol);
    CheckBuilder dual_nonneg("dual_nonnegativity", tol);
    CheckBuilder full_rate("full_rate_when_underloaded", tol);
    CheckBuilder weight_bound("weight_dominates_rate_eta", tol);
    CheckBuilder active_eq("active_weight_equality", tol);
    CheckBuilder eta_bounds("eta_bounds", tol);

    std::vector<Rational> L(g.left.size(), 0), R(g.right.size(), 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        L[g.edges[e].left] += sol.z[e];
        R[g.edges[e].right] += sol.z[e];
        nonneg.le(Rational(-sol.z[e]), Rational(0), edge_label(g, e));
        dual_nonneg.le(Rational(-sol.nu[e]), Rational(0), "nu " + edge_label(g, e));
        slack_nu.eq(Rational(sol.nu[e] * sol.z[e]), Rational(0), edge_label(g, e));
    }
    Rational total_L = 0;
    for (std::size_t l = 0; l < g.left.size(); ++l) {
        left_sum.eq(L[l], sol.L[l], job_label(g.left[l]));
        cap.le(sol.L[l], Rational(1), job_label(g.left[l]));
        dual_nonneg.le(Rational(-sol.theta[l]), Rational(0), "theta " + job_label(g.left[l]));
        slack_theta.eq(Rational(sol.theta[l] * (sol.L[l] - 1)), Rational(0), job_label(g.left[l]));
        total_L += sol.L[l];
    }
    budget.le(total_L, Rational(g.machines), "sum L");
    dual_nonneg.le(Rational(-sol.eta), Rational(0), "eta");
    slack_eta.eq(Rational(sol.eta * (total_L - g.machines)), Rational(0), "sum L");

    bool all_positive = true;
    for (std::size_t r = 0; r < g.right.size(); ++r) {
        right_sum.eq(R[r], sol.R[r], job_label(g.right[r]));
        positive.require(sol.R[r] > 0, job_label(g.right[r]));
        all_positive = all_positive && sol.R[r] > 0;
    }

    if (total_L < g.machines) {
        for (std::size_t l = 0; l < g.left.size(); ++l) full_rate.eq(sol.L[l], Rational(1), job_label(g.left[l]));
    } else {
        full_rate.require(true, "budget saturated");
    }

    if (all_positive) {
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
            const auto& edge = g.edges[e];
            stationarity.eq(Rational(w[edge.right] / sol.R[edge.right]),
                            Rational(sol.theta[edge.left] + sol.eta - sol.nu[e]), edge_label(g, e));
        }
    }

    auto active = active_right(g, sol);
    Rational w_all = 0, w_active = 0;
    for (std::size_t r = 0; r < g.right.size(); ++r) {
        w_all += w[r];
        weight_bound.le(Rational(sol.R[r] * sol.eta), w[r], job_label(g.right[r]));
        if (active[r]) {
            w_active += w[r];
            active_eq.eq(w[r], Rational(sol.R[r] * sol.eta), job_label(g.right[r]));
        }
    }
    const Rational m = g.machines;
    eta_bounds.le(Rational(w_active / m), sol.eta, "lower");
    eta_bounds.le(sol.eta, Rational(w_all / m), "upper");

    AuditReport report;
    for (auto* b : {&left_sum, &right_sum, &nonneg, &cap, &budget, &positive, &stationarity, &slack_theta, &slack_eta,
                    &slack_nu, &dual_nonneg, &full_rate, &weight_bound, &active_eq, &eta_bounds}) {
        report.checks.push_back(b->finish());
    }
    return report;
}

}  // namespace fairdag
