// Numerical probes with pass/fail bounds, grouped into named suites. The CLI verify mode
// and the acceptance binary both run these.
#pragma once

#include <string>
#include <vector>

namespace sww {

struct Check {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    // "<", "<=", ">", ">=", "==" (|measured - bound| within tol), "in" (bound <= measured <= upper)
    std::string relation = "<";
    double upper = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct ProbeResult {
    int id = 0;
    std::string title;
    std::vector<Check> checks;
    double seconds = 0.0;
    double budget = 0.0;
    bool pass() const;
};

struct VerifyOptions {
    double kappa = 0.41421356237309515;  // sqrt(2) - 1
    unsigned long long seed = 1;
    int threads = 1;
    // measure probe
    int samples = 10000;
    int measure_J_max = 10000;
};

// Approximate-solution residual order over eps in {1, 2, 4, 8} x 1e-3.
ProbeResult probe_approx_order(const VerifyOptions& o);
// Zero of the second frequency coefficient against the cubic.
ProbeResult probe_twist_root(const VerifyOptions& o);
// Only (1, 1) is resonant in the 200 x 200 lattice.
ProbeResult probe_kernel_uniqueness(const VerifyOptions& o);
// Shape derivative of the DN operator against centred differences.
ProbeResult probe_shape_derivative(const VerifyOptions& o);
// Defect of the FIO normal matrix relative to the phase size.
ProbeResult probe_normal_matrix(const VerifyOptions& o);
// Orders of the composition terms of |D|^{1/2} A.
ProbeResult probe_composition(const VerifyOptions& o);
// Remainder of the descent, uniform in j and first order in eps.
ProbeResult probe_descent(const VerifyOptions& o);
// Eigenvalue shift against the bare dispersion, quadratic in eps.
ProbeResult probe_eigenvalues(const VerifyOptions& o);
// Screening plus the full iteration at eps = 5e-3.
ProbeResult probe_nash_moser(const VerifyOptions& o);
// Excluded fraction over an eps sweep.
ProbeResult probe_measure(const VerifyOptions& o);
// Conjugation, proportionality, symmetrization and projection identities.
ProbeResult probe_identities(const VerifyOptions& o);
// Planted resonance and the Diophantine constant of the unperturbed frequencies.
ProbeResult probe_screening(const VerifyOptions& o);

const std::vector<std::string>& suite_names();
// Throws std::invalid_argument for an unknown suite.
std::vector<ProbeResult> run_suite(const std::string& suite, const VerifyOptions& o);

// check,measured,bound,pass rows with a versioned header line.
std::string checks_csv(const std::vector<ProbeResult>& results);

}  // namespace sww
