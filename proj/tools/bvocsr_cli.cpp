#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bvocsr.h"

namespace {

struct SubSpec {
    CLI::App* app = nullptr;
    std::string config;
    std::vector<std::string> sets;
};

constexpr std::pair<const char*, const char*> kCommands[] = {
    {"synth", "Generate a deterministic synthetic emission corpus"},
    {"prepare", "Slice, filter, pair and split a corpus into a dataset"},
    {"fit-transform", "Fit the quantile transform on the HR training split"},
    {"train", "Train a super-resolution network"},
    {"evaluate", "Score a checkpoint against a dataset split"},
    {"super-resolve", "Upscale one emission grid with a trained model"},
    {"report", "Write summary tables and comparison images"},
};

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Super-resolution toolkit for sparse wide-dynamic-range "
                 "emission rasters"};
    app.require_subcommand(0, 1);

    std::vector<SubSpec> specs(std::size(kCommands));
    for (size_t i = 0; i < std::size(kCommands); ++i) {
        SubSpec& s = specs[i];
        s.app = app.add_subcommand(kCommands[i].first, kCommands[i].second);
        s.app->add_option("-c,--config", s.config, "key=value config file");
        s.app->add_option("-s,--set", s.sets,
                          "config override, key=value (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage problems are config errors
    }

    const SubSpec* chosen = nullptr;
    size_t chosen_idx = 0;
    for (size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].app->parsed()) {
            chosen = &specs[i];
            chosen_idx = i;
        }
    }
    if (chosen == nullptr) {
        std::fputs(app.help().c_str(), stderr);
        return 2;
    }

    std::vector<std::string> key_store, value_store;
    for (const std::string& kv : chosen->sets) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                         kv.c_str());
            return 2;
        }
        key_store.push_back(kv.substr(0, eq));
        value_store.push_back(kv.substr(eq + 1));
    }
    std::vector<const char*> keys, values;
    for (size_t i = 0; i < key_store.size(); ++i) {
        keys.push_back(key_store[i].c_str());
        values.push_back(value_store[i].c_str());
    }

    const bvocsr_status st = bvocsr_run_with_file(
        kCommands[chosen_idx].first, chosen->config.empty() ? nullptr : chosen->config.c_str(),
        keys.data(), values.data(), keys.size());
    if (st == BVOCSR_OK)
        return 0;
    std::fprintf(stderr, "error: %s\n", bvocsr_last_error());
    return st == BVOCSR_E_CONFIG ? 2 : 1;
}
