// Command layer behind the CLI.  Each command loads its inputs, runs the
// library, writes the requested artifacts, logs a short summary, and
// returns an exit code.  Keeping the commands independent of the argument
// parser lets the tests drive them directly.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtsvd/io.hpp"

namespace rtsvd {

struct RunConfig {
    std::string input;                 // tensor file, or dataset directory
    std::string out;                   // output path or stem
    Method method = Method::rtsvd;
    std::vector<Method> methods;       // recognize / cross-validate; empty = all three
    int k = 1;
    int p = 5;
    int q = 0;
    std::vector<int> k_list;           // bench-error sweep; empty = {k}
    std::vector<int> q_list;           // bench-error sweep; empty = {q}
    double eps = 0.0;                  // > 0 selects per-slice iteration counts
    double delta = 0.05;
    std::uint64_t seed = 0;
    int workers = 0;                   // 0 = environment default
    int trials = 20;
    int folds = 10;
    std::string format = "csv";        // csv | json
    bool zscore = false;
};

// Factorizes a tensor file and writes <out>_u.tt3, <out>_s.tt3,
// <out>_v.tt3 plus <out>_report.json.  Factor files depend only on the
// config, not on the worker count.
int cmd_decompose(const RunConfig& cfg, std::ostream& log);

// Error sweep over (k, q) cells: one output row per cell with the minimal
// error, trial statistics of the sketched error, both bounds, and the mean
// decomposition time.  Trials share seeds across cells, so columns are
// comparable between rows.
int cmd_bench_error(const RunConfig& cfg, std::ostream& log);

// Cross-validated recognition rates written as a fold-by-statistic table
// (<out>.csv) together with the full per-trial report (<out>.json).
int cmd_recognize(const RunConfig& cfg, std::ostream& log);

// Same experiment, raw artifact: one row per (method, fold, trial) in CSV
// mode, the complete report in JSON mode.  CSV output carries no timing,
// so identical configs give byte-identical files.
int cmd_cross_validate(const RunConfig& cfg, std::ostream& log);

// Prints a structural summary of a tensor file or a dataset directory.
int cmd_info(const RunConfig& cfg, std::ostream& log);

} // namespace rtsvd
