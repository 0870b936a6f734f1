#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace lcu::cli {

enum ExitCode : int { ok = 0, check_failed = 1, usage_error = 2 };

/// Bad input from the user; maps to exit code 2.
struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Context
{
    nlohmann::json config = nlohmann::json::object();
    std::optional<std::uint64_t> seed;  // --seed overrides config "seed"
    std::string out;                    // output prefix; empty writes to stdout
    std::string config_dir;             // for relative paths inside the config

    std::uint64_t effective_seed(std::uint64_t fallback = 0) const;
    /// Config with the effective seed filled in; this is what gets hashed.
    nlohmann::json effective_config() const;
    std::string resolve(const std::string& path) const;
};

int cmd_verify(const Context& ctx);
int cmd_fig2(const Context& ctx);
int cmd_fig3(const Context& ctx);
int cmd_fig4(const Context& ctx);
int cmd_trapdoor_keygen(const Context& ctx);
int cmd_trapdoor_eval(const Context& ctx);
int cmd_trapdoor_invert(const Context& ctx);
int cmd_trapdoor_attack(const Context& ctx);
int cmd_trapdoor_demo_involution(const Context& ctx);
int cmd_complete(const Context& ctx, const std::string& method);
int cmd_plot_script(const std::string& figure);

}  // namespace lcu::cli
