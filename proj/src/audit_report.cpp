#include "fairdag/audit_report.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fairdag {

bool AuditReport::ok() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

const AuditCheck* AuditReport::find(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string AuditReport::to_json() const {
    nlohmann::json j;
    j["passed"] = ok();
    auto arr = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json rec{{"name", c.name},
                           {"passed", c.passed},
                           {"evaluated", c.evaluated},
                           {"violations", c.violations},
                           {"worst", c.evaluated ? format_float(c.worst) : "n/a"},
                           {"worst_at", c.worst_at}};
        if (c.worst_exact) rec["worst_exact"] = to_fraction_string(*c.worst_exact);
        if (!c.first_violation.empty()) rec["first_violation"] = c.first_violation;
        arr.push_back(std::move(rec));
    }
    j["checks"] = std::move(arr);
    return j.dump(1) + "\n";
}

CheckBuilder::CheckBuilder(std::string name, double tol) : tol_exact_(tol), tol_(tol) {
    check_.name = std::move(name);
    check_.worst = -std::numeric_limits<double>::infinity();
}

void CheckBuilder::observe(double slack, const std::optional<Rational>& exact, const std::string& where) {
    const bool first = check_.evaluated == 0;
    ++check_.evaluated;
    const bool bad = exact ? *exact > tol_exact_ : !(slack <= tol_);
    if (first || slack > check_.worst || (exact && check_.worst_exact && *exact > *check_.worst_exact)) {
        check_.worst = slack;
        check_.worst_exact = exact;
        check_.worst_at = where;
    }
    if (bad) {
        if (check_.violations == 0) check_.first_violation = where;
        ++check_.violations;
        check_.passed = false;
    }
}

void CheckBuilder::le(const Rational& lhs, const Rational& rhs, const std::string& where) {
    Rational slack = lhs - rhs;
    observe(to_double(slack), slack, where);
}

void CheckBuilder::le(double lhs, double rhs, const std::string& where) { observe(lhs - rhs, std::nullopt, where); }

void CheckBuilder::eq(const Rational& lhs, const Rational& rhs, const std::string& where) {
    Rational gap = abs(lhs - rhs);
    observe(to_double(gap), gap, where);
}

void CheckBuilder::eq(double lhs, double rhs, const std::string& where) {
    observe(std::fabs(lhs - rhs), std::nullopt, where);
}

void CheckBuilder::require(bool condition, const std::string& where) {
    observe(condition ? 0.0 : 1.0, condition ? Rational(0) : Rational(1), where);
}

}  // namespace fairdag
