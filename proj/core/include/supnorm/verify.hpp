#pragma once

#include <string>
#include <vector>

namespace supnorm {

// One acceptance check. Pass means measured <= limit, where limit already
// includes the tol_scale factor of the run.
struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct VerifyOptions {
    // Fixture group to run, or "all". Groups: eikonal-1d, eikonal-2d,
    // metric-equivalence, monotonicity-continuity, envelope-certificate,
    // pointwise-consistency, plateau-control, two-arc-inclusion,
    // chain-structure, determinism.
    std::string fixture = "all";
    // Multiplies every check limit; shrinking it is a drill that forces
    // failures to prove the harness reports them.
    double tol_scale = 1.0;
    // Where the determinism probe writes its run artifacts. Empty means a
    // directory under the system temp path.
    std::string scratch_dir;
};

std::vector<std::string> verify_fixture_names();

std::vector<CheckResult> run_verify(const VerifyOptions& opts = {});

bool all_pass(const std::vector<CheckResult>& checks);

// Stable-format run report: schema_version, per-check pass/fail with the
// measured value and the limit it was held to. No timestamps, so identical
// runs produce identical bytes.
void write_report_json(const std::vector<CheckResult>& checks, double tol_scale,
                       const std::string& path);

}  // namespace supnorm
