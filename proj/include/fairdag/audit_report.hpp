#pragma once

#include "fairdag/rational.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fairdag {

/// Outcome of one named inequality or identity, evaluated at many points.
/// `worst` is the largest observed lhs - rhs (or |lhs - rhs| for identities).
struct AuditCheck {
    std::string name;
    bool passed = true;
    std::size_t evaluated = 0;
    std::size_t violations = 0;
    double worst = 0.0;
    std::optional<Rational> worst_exact;
    std::string worst_at;
    std::string first_violation;
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    bool ok() const;
    const AuditCheck* find(const std::string& name) const;
    std::string to_json() const;
};

/// Collects evaluations of a single check. An inequality lhs <= rhs fails
/// when lhs - rhs > tol; an identity fails when |lhs - rhs| > tol.
class CheckBuilder {
public:
    CheckBuilder(std::string name, double tol);

    void le(const Rational& lhs, const Rational& rhs, const std::string& where);
    void le(double lhs, double rhs, const std::string& where);
    void eq(const Rational& lhs, const Rational& rhs, const std::string& where);
    void eq(double lhs, double rhs, const std::string& where);
    /// Boolean condition with no magnitude.
    void require(bool condition, const std::string& where);

    AuditCheck finish() const { return check_; }

private:
    void observe(double slack, const std::optional<Rational>& exact, const std::string& where);

    AuditCheck check_;
    Rational tol_exact_;
    double tol_;
};

}  // namespace fairdag
