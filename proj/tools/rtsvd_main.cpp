// Command line front end.  All real work lives in the command layer; this
// file only maps flags onto a RunConfig and dispatches.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rtsvd/commands.hpp"

namespace {

void add_sketch_flags(CLI::App* cmd, rtsvd::RunConfig& cfg) {
    cmd->add_option("--p", cfg.p, "oversampling columns beyond k")->check(CLI::NonNegativeNumber);
    cmd->add_option("--eps", cfg.eps,
                    "accuracy target; > 0 selects per-slice iteration counts for rtsvd-q");
    cmd->add_option("--delta", cfg.delta, "failure probability of the tail bound diagnostic");
    cmd->add_option("--seed", cfg.seed, "base seed for every random draw");
    cmd->add_option("--workers", cfg.workers,
                    "slice worker count; 0 reads RTSVD_WORKERS, then hardware");
}

std::string stem_of(const std::string& path) {
    std::filesystem::path p(path);
    p.replace_extension();
    return p.string();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"t-product tensor SVD toolkit: exact and randomized factorizations,\n"
                 "error benchmarks, and subspace-projection image recognition"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a config file; flags win");

    rtsvd::RunConfig cfg;
    std::string method = "rtsvd";
    std::vector<std::string> methods;

    auto* dec = app.add_subcommand("decompose", "factorize a tensor file and save U, S, V");
    dec->add_option("input", cfg.input, "tensor file (.tt3)")->required();
    dec->add_option("-o,--out", cfg.out, "output stem (default: input without extension)");
    dec->add_option("--method", method, "tsvd | rtsvd | rtsvd-q")
        ->check(CLI::IsMember({"tsvd", "rtsvd", "rtsvd-q"}));
    dec->add_option("--k", cfg.k, "truncation rank")->check(CLI::PositiveNumber);
    dec->add_option("--q", cfg.q, "subspace iterations")->check(CLI::NonNegativeNumber);
    add_sketch_flags(dec, cfg);

    auto* bench = app.add_subcommand("bench-error", "error statistics over a (k, q) grid");
    bench->add_option("input", cfg.input, "tensor file (.tt3)")->required();
    bench->add_option("-o,--out", cfg.out, "output file (default: bench.csv or bench.json)");
    bench->add_option("--k", cfg.k_list, "truncation ranks, comma separated")
        ->delimiter(',')
        ->required();
    bench->add_option("--q", cfg.q_list, "iteration counts, comma separated")->delimiter(',');
    bench->add_option("--trials", cfg.trials, "sketch draws per (k, q) cell")
        ->check(CLI::PositiveNumber);
    bench->add_option("--format", cfg.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    add_sketch_flags(bench, cfg);

    auto* rec = app.add_subcommand("recognize",
                                   "cross-validated recognition rate tables for a dataset");
    rec->add_option("input", cfg.input, "dataset directory (class subdirectories of .pgm)")
        ->required();
    rec->add_option("-o,--out", cfg.out, "output stem (default: recognition)");
    rec->add_option("--k", cfg.k, "projector rank")->check(CLI::PositiveNumber);
    rec->add_option("--method", methods, "subset of tsvd,rtsvd,rtsvd-q (default: all)")
        ->delimiter(',');
    rec->add_option("--q", cfg.q, "subspace iterations for rtsvd-q")
        ->check(CLI::NonNegativeNumber);
    rec->add_option("--folds", cfg.folds, "cross validation folds")->check(CLI::PositiveNumber);
    rec->add_option("--trials", cfg.trials, "trials per fold for randomized methods")
        ->check(CLI::PositiveNumber);
    rec->add_flag("--zscore", cfg.zscore, "scale pixels by inverse training deviation");
    add_sketch_flags(rec, cfg);

    auto* cv = app.add_subcommand("cross-validate",
                                  "raw per-trial cross validation rates for a dataset");
    cv->add_option("input", cfg.input, "dataset directory")->required();
    cv->add_option("-o,--out", cfg.out, "output file (default: cv.csv or cv.json)");
    cv->add_option("--k", cfg.k, "projector rank")->check(CLI::PositiveNumber);
    cv->add_option("--method", methods, "subset of tsvd,rtsvd,rtsvd-q (default: all)")
        ->delimiter(',');
    cv->add_option("--q", cfg.q, "subspace iterations for rtsvd-q")
        ->check(CLI::NonNegativeNumber);
    cv->add_option("--folds", cfg.folds, "cross validation folds")->check(CLI::PositiveNumber);
    cv->add_option("--trials", cfg.trials, "trials per fold for randomized methods")
        ->check(CLI::PositiveNumber);
    cv->add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    cv->add_flag("--zscore", cfg.zscore, "scale pixels by inverse training deviation");
    add_sketch_flags(cv, cfg);

    auto* info = app.add_subcommand("info", "describe a tensor file or dataset directory");
    info->add_option("input", cfg.input, "tensor file or directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.method = rtsvd::parse_method(method);
        for (const std::string& m : methods)
            cfg.methods.push_back(rtsvd::parse_method(m));

        if (dec->parsed()) {
            if (cfg.out.empty())
                cfg.out = stem_of(cfg.input);
            return rtsvd::cmd_decompose(cfg, std::cout);
        }
        if (bench->parsed()) {
            if (cfg.out.empty())
                cfg.out = "bench." + cfg.format;
            return rtsvd::cmd_bench_error(cfg, std::cout);
        }
        if (rec->parsed()) {
            if (cfg.out.empty())
                cfg.out = "recognition";
            return rtsvd::cmd_recognize(cfg, std::cout);
        }
        if (cv->parsed()) {
            if (cfg.out.empty())
                cfg.out = "cv." + cfg.format;
            return rtsvd::cmd_cross_validate(cfg, std::cout);
        }
        if (info->parsed())
            return rtsvd::cmd_info(cfg, std::cout);
    } catch (const rtsvd::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
