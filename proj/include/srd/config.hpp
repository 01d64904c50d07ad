#pragma once

// Batch configuration: an INI document with top-level `command`, optional
// `output_dir` and `seed`, and one section named after the command holding
// its parameters. Unknown keys and sections are rejected.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace srd {

enum class Command : std::uint8_t {
    Simulate,
    BarriersCheck,
    Envelope,
    Decay,
    Homogeneous,
    Cone,
    Picard,
    Compare,
    FdCheck,
    Suite,
};

const char* command_name(Command c);
std::optional<Command> parse_command(std::string_view name);

/// Validated configuration with every default filled in. Parameter values are
/// kept as canonical text so that the configuration hash is stable.
struct RunConfig {
    Command command = Command::Suite;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params;
    /// Derived constants echoed back (e.g. A1, b1, b2 for an envelope).
    std::vector<std::pair<std::string, std::string>> derived;

    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    const std::string& text(const std::string& key) const;
    /// FNV-1a over command, parameters and seed.
    std::string hash() const;
};

/// Throws ParseError (with line and key) for malformed input and
/// ConstraintViolation when the parameters violate a module constraint.
RunConfig parse_config(std::string_view source);

/// Keys accepted in the section of `c`, with their defaults ("" = required or optional).
std::vector<std::pair<std::string, std::string>> config_keys(Command c);

struct RunOptions {
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    /// Worker threads for `suite` and `compare`; 0 = hardware concurrency.
    int jobs = 0;
    double tolerance_scale = 1.0;
    /// When false, wall_ms is written as 0 so that reruns are byte-identical.
    bool record_timing = true;
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSimulation = 3;
inline constexpr int kExitVerification = 4;

/// Executes the command, writing `<output_dir>/<command>-<hash>/` with
/// snapshots.csv (when a simulation ran), report.txt and summary.csv.
/// Output directory: options, then config, then SINGULAR_RD_OUTPUT, then "out".
/// Returns kExitPass iff every verdict passes. Errors propagate as exceptions.
int run(const RunConfig& cfg, const RunOptions& options, std::ostream& log);

/// parse_config + run with every library error mapped to its exit code and a
/// one-line diagnostic on `err`.
int run_source(std::string_view source, const RunOptions& options, std::ostream& log, std::ostream& err);

}  // namespace srd
