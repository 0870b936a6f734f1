#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "lcu/io.hpp"
#include "lcu/linalg.hpp"

namespace {

using lcu::cli::Context;

struct GlobalFlags
{
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    CLI::Option* seed_opt = nullptr;
};

Context make_context(const GlobalFlags& g, bool config_required)
{
    Context ctx;
    if (!g.config.empty()) {
        try {
            ctx.config = lcu::io::read_json_file(g.config);
        } catch (const std::invalid_argument& e) {
            throw lcu::cli::UsageError(e.what());
        }
        if (!ctx.config.is_object()) {
            throw lcu::cli::UsageError("config must be a JSON object");
        }
        ctx.config_dir = std::filesystem::path(g.config).parent_path().string();
    } else if (config_required) {
        throw lcu::cli::UsageError("this command needs --config");
    }
    if (g.seed_opt != nullptr && g.seed_opt->count() > 0) {
        ctx.seed = g.seed;
    }
    ctx.out = g.out;
    return ctx;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Alternative LCU circuit: outcome matrices, completion and trapdoor experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags g;
    app.add_option("--config", g.config, "JSON config file");
    g.seed_opt = app.add_option("--seed", g.seed, "seed (overrides the config's \"seed\")");
    app.add_option("--out", g.out, "output prefix; files are PREFIX_<name>.csv/json, stdout if unset");
    app.set_version_flag("--version", LCU_VERSION);

    std::function<int()> action;
    auto bind = [&](CLI::App* sub, bool needs_config, std::function<int(const Context&)> fn) {
        sub->callback([&, needs_config, fn] {
            action = [&, needs_config, fn] { return fn(make_context(g, needs_config)); };
        });
    };

    bind(app.add_subcommand("verify", "run the structural checks on a circuit config"), true,
         lcu::cli::cmd_verify);
    bind(app.add_subcommand("fig2", "success probabilities vs a for alpha = (1,..,1,a,..,a)"), false,
         lcu::cli::cmd_fig2);
    bind(app.add_subcommand("fig3", "completion error vs observed fraction"), false, lcu::cli::cmd_fig3);
    bind(app.add_subcommand("fig4", "completion error vs noise level"), false, lcu::cli::cmd_fig4);

    auto* trap = app.add_subcommand("trapdoor", "key generation, evaluation, inversion, attacks");
    trap->require_subcommand(1);
    bind(trap->add_subcommand("keygen", "draw a secret key"), false, lcu::cli::cmd_trapdoor_keygen);
    bind(trap->add_subcommand("eval", "outcome probabilities for a key and public parameters"), true,
         lcu::cli::cmd_trapdoor_eval);
    bind(trap->add_subcommand("invert", "recover T psi with the key"), true, lcu::cli::cmd_trapdoor_invert);
    bind(trap->add_subcommand("attack", "recover weights without the key"), true,
         lcu::cli::cmd_trapdoor_attack);
    bind(trap->add_subcommand("demo-involution", "encrypt/decrypt with involutory unitaries"), false,
         lcu::cli::cmd_trapdoor_demo_involution);

    auto* comp = app.add_subcommand("complete", "low-rank completion of a partially observed matrix");
    comp->require_subcommand(1);
    for (const char* method : {"svp", "als", "factorized"}) {
        const std::string m = method;
        bind(comp->add_subcommand(m, m + " completion"), false,
             [m](const Context& ctx) { return lcu::cli::cmd_complete(ctx, m); });
    }

    std::string figure;
    auto* plot = app.add_subcommand("plot-script", "print a matplotlib script for a figure CSV");
    plot->add_option("figure", figure, "fig2, fig3 or fig4")->required();
    plot->callback([&] { action = [&] { return lcu::cli::cmd_plot_script(figure); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? lcu::cli::ok : lcu::cli::usage_error;
    }

    try {
        return action ? action() : lcu::cli::usage_error;
    } catch (const lcu::cli::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lcu::cli::usage_error;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << '\n';
        return lcu::cli::usage_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lcu::cli::usage_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return lcu::cli::check_failed;
    }
}
