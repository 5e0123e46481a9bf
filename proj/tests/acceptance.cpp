// Runs the eleven acceptance probes and prints one line per criterion. A criterion passes
// when all its checks hold and it finishes within its time budget.
#include "sww/verify.hpp"

#include <fmt/format.h>

#include <thread>

int main()
{
    sww::VerifyOptions o;
    o.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    using Probe = sww::ProbeResult (*)(const sww::VerifyOptions&);
    const Probe probes[] = {sww::probe_approx_order,     sww::probe_twist_root,     sww::probe_kernel_uniqueness,
                            sww::probe_shape_derivative, sww::probe_normal_matrix,  sww::probe_composition,
                            sww::probe_descent,          sww::probe_eigenvalues,    sww::probe_nash_moser,
                            sww::probe_measure,          sww::probe_identities};
    int failed = 0;
    for (Probe p : probes) {
        const sww::ProbeResult r = p(o);
        const bool in_time = r.seconds <= r.budget;
        const bool ok = r.pass() && in_time;
        failed += ok ? 0 : 1;
        std::string detail;
        for (const sww::Check& c : r.checks)
            detail += fmt::format("{}{}={:.4g}{}", detail.empty() ? "" : ", ", c.name, c.measured, c.pass ? "" : " (!)");
        fmt::print("criterion {:2d} {} {} [{:.1f} s / {:.0f} s{}] {}\n", r.id, ok ? "PASS" : "FAIL", r.title, r.seconds,
                   r.budget, in_time ? "" : ", over budget", detail);
        std::fflush(stdout);
    }
    fmt::print("{} of 11 criteria passed\n", 11 - failed);
    return failed == 0 ? 0 : 1;
}
