// esgvine command-line driver: classify -> fit -> risk -> report, plus simulate.

#include "esgvine/config.hpp"
#include "esgvine/error.hpp"
#include "esgvine/pipeline.hpp"
#include "esgvine/simulate.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <functional>
#include <iostream>
#include <map>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4 };

std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

}  // namespace

int main(int argc, char** argv) {
    using namespace esgvine;

    CLI::App app{"ESG vine-copula risk pipeline"};
    app.require_subcommand(1);

    const std::map<std::string, std::pair<std::string, std::function<StageResult(const RunConfig&)>>> stages{
        {"classify", {"Assign ESG classes, weights and class indices", run_classify}},
        {"fit", {"Fit marginals and vine models per period and catalog", run_fit}},
        {"risk", {"Compute ESG, market and idiosyncratic risk shares", run_risk}},
        {"simulate", {"Generate a synthetic panel from a truth file", run_simulate}},
        {"report", {"Render comparison, census and aggregate tables", run_report}},
    };
    std::map<std::string, Subcommand> subs;
    for (const auto& [name, stage] : stages) {
        Subcommand& sub = subs[name];
        sub.app = app.add_subcommand(name, stage.first);
        sub.app->add_option("-c,--config", sub.config_file, "key = value configuration file")->check(CLI::ExistingFile);
        for (const auto& key : config_keys()) {
            sub.app->add_option(flag_name(key), sub.overrides[key], "override '" + key + "'");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    for (auto& [name, sub] : subs) {
        if (!sub.app->parsed()) continue;
        try {
            RunConfig config = sub.config_file.empty() ? RunConfig{} : load_config(sub.config_file);
            for (const auto& key : config_keys()) {
                if (sub.app->count(flag_name(key)) > 0) config.set(key, sub.overrides[key]);
            }
            config.validate();
            const StageResult result = stages.at(name).second(config);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
            for (const auto& p : result.written) std::cout << p.string() << "\n";
            return kOk;
        } catch (const ConfigError& e) {
            std::cerr << "esgvine " << name << ": config error: " << e.what() << "\n";
            return kConfig;
        } catch (const NumericalError& e) {
            std::cerr << "esgvine " << name << ": numerical failure: " << e.what() << "\n";
            return kNumerical;
        } catch (const DataError& e) {
            std::cerr << "esgvine " << name << ": data error: " << e.what() << "\n";
            return kData;
        } catch (const std::exception& e) {
            // filesystem and allocation failures surface here
            std::cerr << "esgvine " << name << ": " << e.what() << "\n";
            return kData;
        }
    }
    return kConfig;
}
