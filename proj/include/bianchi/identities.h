#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace bianchi {

using IdentityParams = std::map<std::string, double>;

struct IdentityReport {
    std::string identity_id;
    IdentityParams params;
    std::complex<double> lhs;
    std::complex<double> rhs;
    double rel_error = 0.0;
    double quadrature_error_estimate = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Known identity ids, in suite order.
const std::vector<std::string>& identity_ids();

/// Evaluate one identity: lhs by quadrature or series, rhs by closed form.
/// Throws std::invalid_argument when params violate the identity's hypotheses.
IdentityReport verify_identity(const std::string& identity_id, const IdentityParams& params);

/// Default parameter grid for one identity.
std::vector<IdentityParams> default_identity_grid(const std::string& identity_id);

/// Run the default grid of every identity whose id starts with filter (empty = all).
std::vector<IdentityReport> run_identity_suite(const std::string& filter = "");

}  // namespace bianchi
