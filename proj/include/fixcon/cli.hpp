#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fixcon {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigInvalid = 1,
    kExitIntegrationFailure = 2,
    kExitLemmaViolated = 3,
};

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::vector<std::string> overrides;
    std::optional<std::size_t> stride;
};

struct SweepOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    /// ic_scale, dt, or a dotted config key (e.g. gains.default.k).
    std::string parameter;
    std::vector<std::string> values;
    std::vector<std::string> overrides;
    std::optional<std::size_t> stride;
    std::size_t threads = 0;
};

struct LemmaOptions {
    std::uint64_t seed = 20240601;
    std::size_t trials = 100000;
};

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);
int cmd_validate(const std::filesystem::path& config, const std::vector<std::string>& overrides, std::ostream& out,
                 std::ostream& err);
int cmd_lemmas(const LemmaOptions& opts, std::ostream& out);

/// Config key that a sweep parameter name maps to.
std::string sweep_key(const std::string& parameter);

std::string version();

}  // namespace fixcon
