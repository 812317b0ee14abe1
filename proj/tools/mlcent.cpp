#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mlcent/cli.hpp"
#include "mlcent/error.hpp"

namespace {

using namespace mlcent;
using namespace mlcent::cli;

struct RawOptions {
    std::string input;
    std::string builtin;
    std::string measure = "mtc";
    std::string alpha = "0.5rel";
    std::string mode = "exact";
    std::string augment = "none";
    std::string format = "csv";
    std::string nodes;
    bool shifted = false;
};

void add_input(CLI::App* cmd, RawOptions& raw, RunConfig& config) {
    cmd->add_option("--input,-i", raw.input, "edge-list file");
    cmd->add_option("--builtin", raw.builtin, "builtin network (example1)");
    cmd->add_flag("--strict", config.strict, "reject duplicates and weight-flag mismatches");
    cmd->add_option("--format", raw.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_measure(CLI::App* cmd, RawOptions& raw, RunConfig& config) {
    cmd->add_option("--measure", raw.measure, "mtc, mkc, msc-exp or msc-res");
    cmd->add_option("--alpha", raw.alpha, "resolvent parameter, absolute or '<c>rel' for c / lambda_max");
    cmd->add_option("--beta", config.beta, "exponential parameter");
    cmd->add_option("-m", config.m, "Krylov steps");
    cmd->add_option("-R,--block-size", config.block_size, "subgraph batch size");
    cmd->add_option("--augment", raw.augment, "none, ones or random");
    cmd->add_flag("--shifted", raw.shifted, "subtract the identity from f");
    cmd->add_option("--nodes", raw.nodes, "subgraph nodes as node:layer,...");
    cmd->add_option("--dense-cap", config.dense_cap, "largest NL for dense evaluation");
}

void finish(const RawOptions& raw, RunConfig& config) {
    if (!raw.input.empty()) config.input = raw.input;
    if (!raw.builtin.empty()) config.builtin = raw.builtin;
    config.measure = parse_measure(raw.measure);
    config.alpha = AlphaSpec::parse(raw.alpha);
    config.mode = parse_mode(raw.mode);
    config.augment = parse_augmentation(raw.augment);
    config.format = raw.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    config.shift = raw.shifted ? ShiftConvention::Shifted : ShiftConvention::Unshifted;
    if (!raw.nodes.empty()) config.nodes = parse_node_list(raw.nodes);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Centrality measures for multilayer networks"};
    app.require_subcommand(1);

    RawOptions raw;
    RunConfig config;

    auto* rank = app.add_subcommand("rank", "score and rank node-layer pairs");
    add_input(rank, raw, config);
    add_measure(rank, raw, config);
    rank->add_option("--mode", raw.mode, "exact, krylov or both");
    rank->add_option("--precision", config.precision, "decimals in the output");
    rank->add_option("--top", config.top, "length of the ranking");
    rank->add_flag("--stabilize", config.stabilize, "grow m until the top-k ranking stops changing");

    auto* conv = app.add_subcommand("convergence", "Krylov error against the exact scores for m = 1..m-max");
    add_input(conv, raw, config);
    add_measure(conv, raw, config);
    conv->add_option("--m-max", config.m_max, "largest m");

    auto* info = app.add_subcommand("info", "summary of a network");
    add_input(info, raw, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        finish(raw, config);
        std::string out;
        if (rank->parsed()) out = cmd_rank(config);
        else if (conv->parsed()) out = cmd_convergence(config);
        else out = cmd_info(config);
        std::fwrite(out.data(), 1, out.size(), stdout);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
