// bctlab: command-line front end over libbct.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bct/bct_api.h"

namespace {

struct ConfigDeleter {
    void operator()(bct_config* c) const { bct_config_destroy(c); }
};
struct TableDeleter {
    void operator()(bct_table* t) const { bct_table_destroy(t); }
};

int report(bct_status status) {
    std::fprintf(stderr, "bctlab: %s\n", bct_last_error());
    return status == BCT_IO ? 3 : 2;
}

struct Options {
    std::map<std::string, std::string> values;
    std::string dump_trial;  // "a,b" in radians, optional
};

void add_common(CLI::App* cmd, Options& o) {
    auto opt = [&](const std::string& flag, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flag, [&o, key](const std::string& v) { o.values[key] = v; }, help);
    };
    opt("--trials", "trials", "Monte Carlo trials per row");
    opt("--seed", "seed", "master seed");
    opt("--strategy", "strategy", "paper-iic | cyclic-flip | abs-flip");
    opt("--flip-semantics", "flip-semantics", "continue | terminate");
    opt("--coin", "coin", "independent | shared");
    opt("--alice-grid", "alice-grid", "Alice settings, lo:hi:steps or list (pi suffix ok)");
    opt("--angle-grid", "angle-grid", "Bob settings");
    opt("--nu-grid", "nu-grid", "nu values in [0, pi/5]");
    opt("--theta-grid", "theta-grid", "conditioned theta values in [0, 3pi/5)");
    opt("--visibility-grid", "visibility-grid", "visibility values in [0, 1]");
    opt("--alice", "alice", "Alice setting (audit)");
    opt("--bob", "bob", "Bob setting (audit)");
    opt("--format", "format", "csv | json");
    opt("--out", "out", "output file, - for stdout");
    opt("--workers", "workers", "worker threads; output does not depend on this");
    cmd->add_option("--dump-trial", o.dump_trial,
                    "print the JSON records of one two-Bob trial at \"a,b\" and exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo and analytic experiments on the slot-message protocol"};
    app.set_version_flag("--version", std::string("bctlab ") + bct_version());
    app.require_subcommand(1);

    Options options;
    const std::vector<std::pair<std::string, std::string>> experiments = {
        {"correlation", "P(cA = cB) against the cos^2 oracle over a grid of settings"},
        {"opposite-axes", "two Bobs on opposite axes: P(cB1 = cB2) against nu"},
        {"visibility", "erasure noise scan and visibility threshold"},
        {"audit", "per-theta consistency of the b and b+pi answers"},
        {"remedy", "flip rules and coin sharing against the two-Bob anomaly"},
        {"calibrate", "worst-case deviation from cos^2 per strategy"},
    };
    for (const auto& [name, help] : experiments) {
        add_common(app.add_subcommand(name, help), options);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string experiment = app.get_subcommands().front()->get_name();

    bct_config* raw = nullptr;
    if (const auto s = bct_config_create(experiment.c_str(), &raw); s != BCT_OK) return report(s);
    std::unique_ptr<bct_config, ConfigDeleter> config(raw);
    for (const auto& [key, value] : options.values) {
        if (const auto s = bct_config_set(config.get(), key.c_str(), value.c_str()); s != BCT_OK) {
            return report(s);
        }
    }

    if (!options.dump_trial.empty()) {
        const auto comma = options.dump_trial.find(',');
        double a = 0.0;
        double b = 0.0;
        try {
            if (comma == std::string::npos) throw std::invalid_argument("missing comma");
            a = std::stod(options.dump_trial.substr(0, comma));
            b = std::stod(options.dump_trial.substr(comma + 1));
        } catch (const std::exception&) {
            std::fprintf(stderr, "bctlab: --dump-trial expects \"a,b\" in radians\n");
            return 2;
        }
        size_t needed = 0;
        if (const auto s = bct_trial_dump(config.get(), a, b, nullptr, 0, &needed); s != BCT_OK) {
            return report(s);
        }
        std::string text(needed + 1, '\0');
        bct_trial_dump(config.get(), a, b, text.data(), text.size(), &needed);
        text.resize(needed);
        std::fputs(text.c_str(), stdout);
        return 0;
    }

    bct_table* table_raw = nullptr;
    if (const auto s = bct_run(config.get(), &table_raw); s != BCT_OK) return report(s);
    std::unique_ptr<bct_table, TableDeleter> table(table_raw);

    const auto format = options.values.count("format") ? options.values["format"] : "csv";
    const auto out = options.values.count("out") ? options.values["out"] : "";
    if (const auto s = bct_table_write(table.get(), format.c_str(), out.c_str()); s != BCT_OK) {
        return report(s);
    }
    return 0;
}
