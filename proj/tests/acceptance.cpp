// Runs every verification fixture and reports one line per criterion.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "supnorm/verify.hpp"

namespace {

struct Criterion {
    const char* fixture;
    const char* label;
};

constexpr Criterion kCriteria[] = {
    {"eikonal-1d",
     "interval eikonal data: exact value, extremal envelope, attainment, chains"},
    {"eikonal-2d", "disc eikonal data: value, extremal fields, pointwise slope"},
    {"metric-equivalence", "sampled-profile distances match closed forms"},
    {"monotonicity-continuity",
     "level-set distances are monotone and left-continuous in lambda"},
    {"envelope-certificate",
     "minimizers sit inside the extremal envelope with a sublevel certificate"},
    {"pointwise-consistency",
     "pointwise slope statistic is consistent with the optimal value"},
    {"plateau-control", "flat-stretch gauge: conjugate band, strict drop, chain stall"},
    {"two-arc-inclusion",
     "opposite-face tent data: attainment inclusion and chain containment"},
    {"chain-structure",
     "ascent chains: step bounds, boundary endpoints, additive lengths"},
    {"determinism", "independent runs emit byte-identical artifacts"},
};

}  // namespace

int main() {
    std::vector<supnorm::CheckResult> checks;
    try {
        supnorm::VerifyOptions opts;
        opts.fixture = "all";
        checks = supnorm::run_verify(opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: verification run threw: %s\n", e.what());
        return 1;
    }

    int n_pass = 0;
    int idx = 0;
    for (const auto& [fixture, label] : kCriteria) {
        ++idx;
        const std::string prefix = std::string(fixture) + "/";
        int total = 0;
        std::vector<const supnorm::CheckResult*> failed;
        for (const auto& c : checks) {
            if (c.name.rfind(prefix, 0) != 0) continue;
            ++total;
            if (!c.pass) failed.push_back(&c);
        }
        const bool ok = total > 0 && failed.empty();
        n_pass += ok ? 1 : 0;
        std::printf("[%s] %2d. %s (%d checks)\n", ok ? "PASS" : "FAIL", idx, label,
                    total);
        for (const auto* c : failed)
            std::printf("       %s: measured %.6g vs limit %.6g%s%s\n",
                        c->name.c_str(), c->measured, c->limit,
                        c->detail.empty() ? "" : " - ", c->detail.c_str());
    }
    std::printf("%d/10 criteria passed\n", n_pass);
    return n_pass == 10 ? 0 : 1;
}
