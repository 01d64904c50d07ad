#include "srd/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include "srd/barriers.hpp"
#include "srd/errors.hpp"
#include "srd/verify.hpp"

namespace srd {

namespace {

namespace pt = boost::property_tree;

using Schema = std::vector<std::pair<std::string, std::string>>;

constexpr const char* kBarrierKeys[] = {"nu", "dim", "alpha1", "alpha2", "eps", "a2", "beta", "horizon", "amp", "t1"};

const Schema& resolution_keys() {
    static const Schema keys = {{"floor", "1e-08"}, {"snapshot_every", "0.05"}, {"scheme", "backward-euler"}};
    return keys;
}

Schema with_resolution(Schema s, const std::string& radius, const std::string& cells, const std::string& dt,
                       const std::string& dt_min) {
    s.insert(s.end(), {{"radius", radius}, {"cells", cells}, {"dt", dt}, {"dt_min", dt_min}});
    s.insert(s.end(), resolution_keys().begin(), resolution_keys().end());
    return s;
}

Schema barrier_schema(Schema s, const std::string& family) {
    s.insert(s.begin(), {"family", family});
    for (const char* k : kBarrierKeys) s.emplace_back(k, "");
    return s;
}

// Family defaults mirror the reference runs.
const std::map<std::string, std::string>& family_defaults(BarrierFamily f) {
    static const std::map<std::string, std::string> growth = {
        {"nu", "1"}, {"dim", "3"}, {"alpha1", "0.5"}, {"eps", "0.5"}};
    static const std::map<std::string, std::string> decay = {
        {"nu", "1"}, {"dim", "4"}, {"beta", "0.5"}, {"horizon", "1"}};
    static const std::map<std::string, std::string> homogeneous = {{"nu", "1"}, {"horizon", "0.5"}};
    static const std::map<std::string, std::string> cone = {
        {"nu", "1"}, {"dim", "1"}, {"amp", "0.70710678118654757"}, {"t1", "1"}};
    switch (f) {
        case BarrierFamily::GrowthLower:
        case BarrierFamily::GrowthUpper: return growth;
        case BarrierFamily::Decay: return decay;
        case BarrierFamily::Homogeneous: return homogeneous;
        case BarrierFamily::Cone: return cone;
    }
    return growth;
}

int line_of(std::string_view source, const std::string& section, const std::string& key) {
    std::istringstream in{std::string(source)};
    std::string line, current;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '[') {
            const auto close = line.find(']', first);
            current = line.substr(first + 1, close == std::string::npos ? std::string::npos : close - first - 1);
            continue;
        }
        if (current != section) continue;
        const auto eq = line.find('=', first);
        if (eq == std::string::npos) continue;
        std::string k = line.substr(first, eq - first);
        k.erase(k.find_last_not_of(" \t") + 1);
        if (k == key) return number;
    }
    return 0;
}

int section_line(std::string_view source, const std::string& section) {
    std::istringstream in{std::string(source)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto first = line.find_first_not_of(" \t");
        if (first != std::string::npos && line.compare(first, section.size() + 2, "[" + section + "]") == 0)
            return number;
    }
    return 0;
}

[[noreturn]] void field_error(std::string_view source, const std::string& section, const std::string& key,
                              const std::string& what) {
    const int line = line_of(source, section, key);
    const std::string where = section.empty() ? key : fmt::format("[{}] {}", section, key);
    if (line > 0) throw ParseError(fmt::format("line {}: {}: {}", line, where, what));
    throw ParseError(fmt::format("{}: {}", where, what));
}

std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (errno == ERANGE || end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> to_integer(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno == ERANGE || end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

enum class Kind { Number, Integer, Text, Boolean };

Kind kind_of(const std::string& key) {
    static const std::set<std::string> integers = {"dim", "cells", "samples", "fd_samples", "pairs", "max_iters",
                                                   "lin_steps"};
    static const std::set<std::string> texts = {"family", "scheme", "initial", "boundary", "profile", "checks"};
    static const std::set<std::string> booleans = {"stop_on_first_extinction"};
    if (integers.contains(key)) return Kind::Integer;
    if (texts.contains(key)) return Kind::Text;
    if (booleans.contains(key)) return Kind::Boolean;
    return Kind::Number;
}

const std::set<std::string>& choices(const std::string& key) {
    static const std::map<std::string, std::set<std::string>> table = {
        {"scheme", {"backward-euler", "tr-bdf2"}},
        {"initial", {"barrier", "constant"}},
        {"boundary", {"barrier", "constant", "neumann"}},
        {"profile", {"constant", "decaying"}},
    };
    static const std::set<std::string> none;
    const auto it = table.find(key);
    return it == table.end() ? none : it->second;
}

const std::set<std::string>& suite_checks() {
    static const std::set<std::string> all = {"homogeneous", "envelope", "cone",   "decay",
                                              "residual-sign", "fd",     "picard", "compare"};
    return all;
}

std::string canonical(std::string_view source, const std::string& section, const std::string& key,
                      const std::string& raw) {
    switch (kind_of(key)) {
        case Kind::Number: {
            const auto v = to_double(raw);
            if (!v) field_error(source, section, key, fmt::format("expected a finite number, got '{}'", raw));
            return fmt::format("{:.17g}", *v);
        }
        case Kind::Integer: {
            const auto v = to_integer(raw);
            if (!v) field_error(source, section, key, fmt::format("expected an integer, got '{}'", raw));
            return std::to_string(*v);
        }
        case Kind::Boolean:
            if (raw == "true" || raw == "1") return "true";
            if (raw == "false" || raw == "0") return "false";
            field_error(source, section, key, fmt::format("expected true or false, got '{}'", raw));
        case Kind::Text: break;
    }
    const auto& allowed = choices(key);
    if (!allowed.empty() && !allowed.contains(raw))
        field_error(source, section, key, fmt::format("unknown value '{}'", raw));
    if (key == "family" && raw != "all" && !parse_family(raw))
        field_error(source, section, key, fmt::format("unknown barrier family '{}'", raw));
    if (key == "checks" && raw != "all") {
        std::istringstream in(raw);
        std::string item;
        while (std::getline(in, item, ','))
            if (!suite_checks().contains(item))
                field_error(source, section, key, fmt::format("unknown check '{}'", item));
    }
    return raw;
}

std::string g17(double x) { return fmt::format("{:.17g}", x); }

void require_positive(const RunConfig& cfg, const std::string& section, std::initializer_list<const char*> keys) {
    for (const char* k : keys)
        if (cfg.params.contains(k) && !(cfg.number(k) > 0.0))
            throw ConstraintViolation(fmt::format("[{}] {} must be positive, got {}", section, k, cfg.text(k)));
}

void require_at_least(const RunConfig& cfg, const std::string& section, const char* key, int lo) {
    if (cfg.params.contains(key) && cfg.integer(key) < lo)
        throw ConstraintViolation(fmt::format("[{}] {} must be >= {}, got {}", section, key, lo, cfg.text(key)));
}

// Derives the barrier constants the section describes, validating them and
// recording the derived values for the echo.
void derive_and_echo(RunConfig& cfg, const std::string& section) {
    auto num = [&](const char* k) { return cfg.number(k); };
    auto has = [&](const char* k) { return cfg.params.contains(k) && !cfg.text(k).empty(); };
    auto echo = [&](const char* k, double v) { cfg.derived.emplace_back(k, g17(v)); };
    auto growth = [&] {
        const double alpha1 = num("alpha1");
        const double alpha2 = has("alpha2") ? num("alpha2") : alpha1;
        const auto a2 = has("a2") ? std::optional<double>(num("a2")) : std::nullopt;
        const GrowthEnvelope env = derive_growth_params(num("nu"), cfg.integer("dim"), alpha1, alpha2, num("eps"), a2);
        echo("A1", env.a1);
        echo("A2", env.a2);
        echo("b1", env.b1);
        echo("b2", env.b2);
    };
    auto family_barrier = [&](BarrierFamily f) {
        switch (f) {
            case BarrierFamily::GrowthLower:
            case BarrierFamily::GrowthUpper: growth(); break;
            case BarrierFamily::Decay:
                echo("A3", derive_decay_params(num("nu"), cfg.integer("dim"), num("beta"), num("horizon")).a3);
                break;
            case BarrierFamily::Homogeneous:
                echo("value_at_0", eval(make_homogeneous(num("nu"), num("horizon")), 0.0, 0.0));
                break;
            case BarrierFamily::Cone: {
                const auto p = derive_cone_params(num("nu"), cfg.integer("dim"), num("amp"), num("t1"));
                echo("b", p.slope);
                echo("T", p.horizon);
                break;
            }
        }
    };
    try {
        switch (cfg.command) {
            case Command::Envelope:
            case Command::Compare: growth(); break;
            case Command::Decay: family_barrier(BarrierFamily::Decay); break;
            case Command::Cone: family_barrier(BarrierFamily::Cone); break;
            case Command::Homogeneous: {
                const Homogeneous h = homogeneous_from_sup(num("nu"), num("sup0"));
                echo("T", h.horizon);
                break;
            }
            case Command::Picard: {
                if (!(num("delta") > 0.0))
                    throw ConstraintViolation(fmt::format("delta must be positive, got {}", cfg.text("delta")));
                echo("T", std::min(0.5 * num("t1"), std::pow(0.5 * num("delta"), 1.0 + num("nu"))));
                break;
            }
            case Command::Simulate:
            case Command::BarriersCheck:
                family_barrier(*parse_family(cfg.text("family")));
                break;
            case Command::FdCheck:
                if (cfg.text("family") != "all") family_barrier(*parse_family(cfg.text("family")));
                break;
            case Command::Suite: break;
        }
    } catch (const ConstraintViolation& e) {
        throw ConstraintViolation(fmt::format("[{}] {}", section, e.what()));
    } catch (const DomainError& e) {
        throw ConstraintViolation(fmt::format("[{}] {}", section, e.what()));
    }
}

}  // namespace

const char* command_name(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::BarriersCheck: return "barriers-check";
        case Command::Envelope: return "envelope";
        case Command::Decay: return "decay";
        case Command::Homogeneous: return "homogeneous";
        case Command::Cone: return "cone";
        case Command::Picard: return "picard";
        case Command::Compare: return "compare";
        case Command::FdCheck: return "fd-check";
        case Command::Suite: return "suite";
    }
    return "unknown";
}

std::optional<Command> parse_command(std::string_view name) {
    for (Command c : {Command::Simulate, Command::BarriersCheck, Command::Envelope, Command::Decay,
                      Command::Homogeneous, Command::Cone, Command::Picard, Command::Compare, Command::FdCheck,
                      Command::Suite})
        if (name == command_name(c)) return c;
    return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> config_keys(Command c) {
    switch (c) {
        case Command::Simulate:
            return barrier_schema(
                with_resolution({{"initial", "barrier"},
                                 {"initial_value", "1"},
                                 {"boundary", "barrier"},
                                 {"boundary_value", "1"},
                                 {"dt_safety", "0.1"},
                                 {"t_end", "1"},
                                 {"stop_on_first_extinction", "false"}},
                                "20", "2000", "0.001", "0"),
                "growth-lower");
        case Command::BarriersCheck:
            return barrier_schema({{"r2_max", "100"}, {"t_max", "10"}, {"samples", "100"}}, "growth-lower");
        case Command::Envelope:
            return with_resolution({{"nu", "1"},
                                    {"dim", "3"},
                                    {"alpha1", "0.5"},
                                    {"alpha2", ""},
                                    {"eps", "0.5"},
                                    {"a2", ""},
                                    {"t_end", "1"},
                                    {"tolerance", "0.001"}},
                                   "20", "2000", "0.001", "0");
        case Command::Decay:
            return with_resolution(
                {{"nu", "1"}, {"dim", "4"}, {"beta", "0.5"}, {"horizon", "1"}, {"tolerance", "0.001"}}, "30", "3000",
                "0.001", "1e-05");
        case Command::Homogeneous:
            return with_resolution({{"nu", "1"}, {"sup0", "1"}, {"profile", "constant"}, {"tolerance", "0.001"}},
                                   "1", "16", "0.0001", "0");
        case Command::Cone:
            return with_resolution({{"nu", "1"},
                                    {"dim", "1"},
                                    {"amp", "0.70710678118654757"},
                                    {"t1", "1"},
                                    {"tolerance", "0.001"}},
                                   "15", "1500", "0.0001", "0");
        case Command::Picard:
            return {{"nu", "1"},         {"dim", "1"},          {"radius", "1"},       {"cells", "100"},
                    {"delta", "1"},      {"t1", "10"},          {"max_iters", "30"},   {"lin_steps", "2048"},
                    {"stop_tol", "1e-10"}, {"tolerance", "1e-06"}, {"agreement", "1e-05"}};
        case Command::Compare:
            return with_resolution({{"nu", "1"},
                                    {"dim", "3"},
                                    {"alpha1", "0.5"},
                                    {"alpha2", ""},
                                    {"eps", "0.5"},
                                    {"pairs", "10"},
                                    {"t_end", "1"},
                                    {"tolerance", "1e-06"}},
                                   "20", "1000", "0.001", "0.0001");
        case Command::FdCheck: return barrier_schema({{"samples", "1000"}, {"tolerance", "1e-06"}}, "all");
        case Command::Suite: return {{"checks", "all"}, {"samples", "10000"}, {"fd_samples", "1000"}};
    }
    return {};
}

double RunConfig::number(const std::string& key) const { return std::strtod(text(key).c_str(), nullptr); }

int RunConfig::integer(const std::string& key) const { return static_cast<int>(std::strtol(text(key).c_str(), nullptr, 10)); }

const std::string& RunConfig::text(const std::string& key) const {
    const auto it = params.find(key);
    if (it == params.end()) throw ParseError(fmt::format("missing parameter '{}'", key));
    return it->second;
}

std::string RunConfig::hash() const {
    std::string canon = fmt::format("command={};seed={}", command_name(command), seed);
    for (const auto& [k, v] : params) canon += fmt::format(";{}={}", k, v);
    return fnv1a_hex(canon);
}

RunConfig parse_config(std::string_view source) {
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("empty configuration: expected at least 'command = <name>'");
    pt::ptree tree;
    try {
        std::istringstream in{std::string(source)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError(fmt::format("line {}: {}", e.line(), e.message()));
    }

    RunConfig cfg;
    const pt::ptree* section = nullptr;
    std::string command_text;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) continue;
        if (key == "command") {
            command_text = node.data();
        } else if (key == "output_dir") {
            cfg.output_dir = node.data();
        } else if (key == "seed") {
            const auto v = to_integer(node.data());
            if (!v || *v < 0) field_error(source, "", key, fmt::format("expected a nonnegative integer, got '{}'", node.data()));
            cfg.seed = static_cast<std::uint64_t>(*v);
        } else {
            field_error(source, "", key, "unknown top-level key");
        }
    }
    if (command_text.empty()) throw ParseError("missing top-level key 'command'");
    const auto command = parse_command(command_text);
    if (!command) field_error(source, "", "command", fmt::format("unknown command '{}'", command_text));
    cfg.command = *command;
    const std::string name = command_name(cfg.command);

    for (const auto& [key, node] : tree) {
        if (node.empty()) continue;
        if (key != name) {
            const int line = section_line(source, key);
            throw ParseError(fmt::format("line {}: unknown section [{}] for command '{}'", line, key, name));
        }
        section = &node;
    }

    const auto schema = config_keys(cfg.command);
    std::map<std::string, std::string> given;
    if (section) {
        for (const auto& [key, node] : *section) {
            const bool known = std::ranges::any_of(schema, [&](const auto& kv) { return kv.first == key; });
            if (!known) field_error(source, name, key, "unknown key");
            given[key] = node.data();
        }
    }

    // Family-specific defaults fill barrier keys left empty by the schema.
    std::optional<BarrierFamily> family;
    if (const auto it = given.find("family"); it != given.end()) {
        (void)canonical(source, name, "family", it->second);
        if (it->second != "all") family = parse_family(it->second);
    } else if (cfg.command == Command::Simulate || cfg.command == Command::BarriersCheck) {
        family = BarrierFamily::GrowthLower;
    }

    for (const auto& [key, def] : schema) {
        std::string raw;
        if (const auto it = given.find(key); it != given.end()) {
            raw = it->second;
        } else if (def.empty() && family) {
            const auto& defaults = family_defaults(*family);
            if (const auto d = defaults.find(key); d != defaults.end()) raw = d->second;
        } else {
            raw = def;
        }
        if (raw.empty()) continue;
        cfg.params[key] = canonical(source, name, key, raw);
    }

    require_positive(cfg, name, {"radius", "dt", "floor", "snapshot_every", "sup0", "t1", "horizon",
                                 "r2_max", "t_max", "agreement", "dt_safety"});
    require_at_least(cfg, name, "cells", 8);
    require_at_least(cfg, name, "samples", 1);
    require_at_least(cfg, name, "fd_samples", 1);
    require_at_least(cfg, name, "pairs", 1);
    require_at_least(cfg, name, "max_iters", 1);
    require_at_least(cfg, name, "lin_steps", 1);
    if (cfg.params.contains("dt_min") && cfg.number("dt_min") < 0.0)
        throw ConstraintViolation(fmt::format("[{}] dt_min must be nonnegative", name));
    for (const char* k : {"tolerance", "stop_tol"})
        if (cfg.params.contains(k) && cfg.number(k) < 0.0)
            throw ConstraintViolation(fmt::format("[{}] {} must be nonnegative", name, k));
    if (cfg.params.contains("t_end") && cfg.number("t_end") < 0.0)
        throw ConstraintViolation(fmt::format("[{}] t_end must be nonnegative", name));
    derive_and_echo(cfg, name);
    return cfg;
}

}  // namespace srd
