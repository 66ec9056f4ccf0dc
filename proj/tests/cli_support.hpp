#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace cli_support {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

inline std::string problem(const std::string& name) { return std::string(NLPENCIL_PROBLEMS_DIR) + "/" + name; }

/// Runs the CLI with stderr discarded and returns stdout with the exit status.
inline RunResult run(const std::string& args) {
    const std::string cmd = std::string(NLPENCIL_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct Golden {
    std::string name;
    std::string args;
};

/// Commands whose reports are checked for content and byte stability.
inline std::vector<Golden> golden_commands() {
    return {
        {"eigs_periodic", "eigs --problem " + problem("periodic.json") + " --rect -0.5 4.5 -4.5 0.5 --nphi 64"},
        {"verdict_ex21", "verdict --problem " + problem("ex21.json") + " --a 1 --l 0"},
        {"strip_periodic", "strip-check --problem " + problem("periodic.json") + " --h2 -1.5 --h1 -0.5"},
        {"jordan_zero", "jordan --problem " + problem("periodic.json") + " --lambda 0 0.01"},
        {"asym_periodic", "asym --problem " + problem("periodic.json") + " --a1 1 --l1 0 --a2 -0.25 --l2 0"},
        {"adjoint_anisotropic", "adjoint-check --problem " + problem("anisotropic.json") +
                                    " --rect -1.5 1.5 -1.5 0.5 --adjoint-nphi 96"},
        {"sector_solve", "sector-solve --problem " + problem("sector_compliant.json")},
        {"exponent_ex21", "exponent-fit --problem " + problem("sector_ex21.json")},
        {"resolvent_scan", "resolvent-scan --problem " + problem("sector_resolvent.json") + " --h 0.4"},
        {"convergence", "convergence --problem " + problem("sector_compliant.json")},
        {"norm", "norm --problem " + problem("sector_compliant.json") + " --a 1 --k 2 --flavor E"},
    };
}

}  // namespace cli_support
