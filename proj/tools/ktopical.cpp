// Command-line front end: ktopical {verify|simulate|consensus|sweep} --config FILE

#include <iostream>

#include <CLI11.hpp>

#include "ktopical/app.hpp"

int main(int argc, char** argv) {
    using namespace ktopical::app;

    CLI::App cli{"Verify and simulate type-K monotone, plus-homogeneous dynamical systems"};
    cli.require_subcommand(1);

    CommandOptions opts;
    std::string config, out = ".";
    std::uint64_t seed = 0;

    struct Sub {
        const char* name;
        const char* help;
        Command cmd;
    };
    const Sub subs[] = {
        {"verify", "run the structural checks and classify the model", Command::verify},
        {"simulate", "simulate from the configured initial state", Command::simulate},
        {"consensus", "check consensus conditions and simulate a multi-agent model", Command::consensus},
        {"sweep", "run a parameter sweep", Command::sweep},
    };
    std::vector<std::pair<CLI::App*, Command>> apps;
    std::vector<CLI::Option*> seed_opts;
    for (const auto& s : subs) {
        auto* sc = cli.add_subcommand(s.name, s.help);
        sc->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", out, "output directory")->capture_default_str();
        sc->add_option("--seed", seed, "override plan.seed");
        seed_opts.push_back(sc->get_option("--seed"));
        if (s.cmd == Command::sweep)
            sc->add_option("--jobs", opts.jobs, "parallel runs")->capture_default_str()->check(CLI::PositiveNumber);
        apps.emplace_back(sc, s.cmd);
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return 1;
    }

    opts.config = config;
    opts.out_dir = out;
    for (std::size_t k = 0; k < apps.size(); ++k) {
        if (!apps[k].first->parsed()) continue;
        if (seed_opts[k]->count() > 0) opts.seed = seed;
        return run_command(apps[k].second, opts, std::cout, std::cerr);
    }
    return 1;
}
