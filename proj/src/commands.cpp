#include "rtsvd/commands.hpp"

#include "rtsvd/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace rtsvd {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

int effective_workers(const RunConfig& cfg) {
    return cfg.workers > 0 ? cfg.workers : default_workers();
}

std::vector<Method> methods_or_default(const RunConfig& cfg) {
    if (!cfg.methods.empty())
        return cfg.methods;
    return {Method::tsvd, Method::rtsvd, Method::rtsvd_q};
}

std::string fmt(double v, int digits) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::string fmt_opt(const std::optional<double>& v, int digits) {
    return v ? fmt(*v, digits) : std::string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot create '" + path + "'");
    out << content;
    if (!out)
        throw IoError("write failure on '" + path + "'");
}

json report_json(const ErrorReport& rep) {
    json j;
    j["realized"] = rep.realized;
    j["optimal"] = rep.optimal;
    j["norm_a"] = rep.norm_a;
    j["seconds"] = rep.seconds;
    j["p_effective"] = rep.p_effective;
    if (!rep.tau.empty())
        j["tau"] = rep.tau;
    if (!rep.q_used.empty())
        j["q_used"] = rep.q_used;
    j["expected_bound"] = rep.expected_bound ? json(*rep.expected_bound) : json();
    j["tail_bound"] = rep.tail_bound ? json(*rep.tail_bound) : json();
    j["c_delta"] = rep.c_delta ? json(*rep.c_delta) : json();
    return j;
}

SketchConfig sketch_config(const RunConfig& cfg) {
    SketchConfig s;
    s.k = cfg.k;
    s.p = cfg.p;
    s.q = cfg.q;
    s.eps = cfg.eps;
    s.seed = cfg.seed;
    s.delta = cfg.delta;
    return s;
}

} // namespace

int cmd_decompose(const RunConfig& cfg, std::ostream& log) {
    const Tensor3 a = load_tensor(cfg.input);
    const int workers = effective_workers(cfg);

    TsvdFactors f;
    ErrorReport rep;
    if (cfg.method == Method::tsvd) {
        const auto start = std::chrono::steady_clock::now();
        f = tsvd_truncated(a, cfg.k, workers);
        rep.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        rep.norm_a = frobenius_norm(a);
        rep.optimal = rep.norm_a > 0.0 ? optimal_error(f.sigma_hat, cfg.k) / rep.norm_a : 0.0;

        const Tensor3 rec = reconstruct(f);
        double rss = 0.0;
        for (Index i = 0; i < a.size(); ++i) {
            double d = a.data()[i] - rec.data()[i];
            rss += d * d;
        }
        rep.realized = rep.norm_a > 0.0 ? std::sqrt(rss) / rep.norm_a : 0.0;
    } else {
        SketchConfig s = sketch_config(cfg);
        if (cfg.method == Method::rtsvd) {
            std::tie(f, rep) = rtsvd(a, s, workers);
        } else {
            if (cfg.eps > 0.0) {
                Matrix sigma = slice_singular_values(a, workers);
                s.q_per_slice = choose_iterations(sigma, s.k, s.p, cfg.eps, s.q_max);
            }
            std::tie(f, rep) = rtsvd_subspace(a, s, workers);
        }
    }

    save_tensor(cfg.out + "_u.tt3", f.u);
    save_tensor(cfg.out + "_s.tt3", f.s);
    save_tensor(cfg.out + "_v.tt3", f.v);

    json j = report_json(rep);
    j["command"] = "decompose";
    j["input"] = cfg.input;
    j["dims"] = {a.n1(), a.n2(), a.n3()};
    j["method"] = method_name(cfg.method);
    j["k"] = cfg.k;
    j["p"] = cfg.p;
    j["seed"] = cfg.seed;
    j["workers"] = workers;
    write_text(cfg.out + "_report.json", j.dump(2) + "\n");

    log << "decompose " << cfg.input << " [" << a.n1() << "x" << a.n2() << "x" << a.n3() << "] "
        << method_name(cfg.method) << " k=" << cfg.k << ": error " << fmt(rep.realized, 6)
        << " (optimal " << fmt(rep.optimal, 6) << ") in " << fmt(rep.seconds, 4) << " s\n";
    return 0;
}

int cmd_bench_error(const RunConfig& cfg, std::ostream& log) {
    const Tensor3 a = load_tensor(cfg.input);
    const int workers = effective_workers(cfg);
    const double norm = frobenius_norm(a);
    const Matrix sigma = slice_singular_values(a, workers);

    const std::vector<int> ks = cfg.k_list.empty() ? std::vector<int>{cfg.k} : cfg.k_list;
    const std::vector<int> qs = cfg.q_list.empty() ? std::vector<int>{cfg.q} : cfg.q_list;
    const int trials = std::max(1, cfg.trials);

    struct Row {
        int k, q;
        double e_k, mean, min, max, wall;
        std::optional<double> bound, tail;
    };
    std::vector<Row> rows;
    for (int k : ks) {
        const double e_k = norm > 0.0 ? optimal_error(sigma, k) / norm : 0.0;
        for (int q : qs) {
            SketchConfig s = sketch_config(cfg);
            s.k = k;
            s.q = q;
            Row row{k, q, e_k, 0.0, std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(), 0.0, {}, {}};
            for (int t = 0; t < trials; ++t) {
                // trial seeds shared across every (k, q) cell
                s.seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(t));
                auto [f, rep] = rtsvd_subspace(a, s, workers);
                row.mean += rep.realized;
                row.min = std::min(row.min, rep.realized);
                row.max = std::max(row.max, rep.realized);
                row.wall += rep.seconds;
                row.bound = rep.expected_bound;
                row.tail = rep.tail_bound;
            }
            row.mean /= trials;
            row.wall /= trials;
            rows.push_back(row);
        }
    }

    std::string artifact;
    if (cfg.format == "json") {
        json arr = json::array();
        for (const Row& r : rows) {
            json j;
            j["k"] = r.k;
            j["q"] = r.q;
            j["e_k"] = r.e_k;
            j["mean_eqk"] = r.mean;
            j["min_eqk"] = r.min;
            j["max_eqk"] = r.max;
            j["bound"] = r.bound ? json(*r.bound) : json();
            j["tail_bound"] = r.tail ? json(*r.tail) : json();
            j["wall_time"] = r.wall;
            arr.push_back(j);
        }
        artifact = arr.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "k,q,e_k,mean_eqk,min_eqk,max_eqk,bound,tail_bound,wall_time\n";
        for (const Row& r : rows)
            os << r.k << ',' << r.q << ',' << fmt(r.e_k, 12) << ',' << fmt(r.mean, 12) << ','
               << fmt(r.min, 12) << ',' << fmt(r.max, 12) << ',' << fmt_opt(r.bound, 12) << ','
               << fmt_opt(r.tail, 12) << ',' << fmt(r.wall, 6) << '\n';
        artifact = os.str();
    }
    write_text(cfg.out, artifact);

    log << "bench-error " << cfg.input << ": " << rows.size() << " rows (" << trials
        << " trials each) -> " << cfg.out << "\n";
    return 0;
}

namespace {

CvReport run_cv(const RunConfig& cfg, const std::vector<Method>& methods, FaceDataset& data) {
    data = load_image_dir(cfg.input);
    return cross_validate(data, cfg.k, methods, cfg.folds, cfg.trials, cfg.seed,
                          sketch_config(cfg), effective_workers(cfg), cfg.zscore);
}

json cv_json(const CvReport& report, const RunConfig& cfg, const FaceDataset& data) {
    json j;
    j["command"] = "cross-validate";
    j["input"] = cfg.input;
    j["images"] = data.count();
    j["classes"] = data.label_names;
    j["k"] = cfg.k;
    j["folds"] = report.folds;
    j["trials"] = report.trials;
    j["seed"] = report.seed;
    json ms = json::array();
    for (const CvMethodReport& m : report.methods) {
        json mj;
        mj["method"] = method_name(m.method);
        json folds = json::array();
        for (const CvFoldStats& st : m.folds) {
            json fj;
            fj["rates"] = st.rates;
            fj["mean"] = st.mean;
            fj["min"] = st.min;
            fj["max"] = st.max;
            fj["train_seconds"] = st.train_seconds;
            folds.push_back(fj);
        }
        mj["folds"] = folds;
        ms.push_back(mj);
    }
    j["methods"] = ms;
    return j;
}

// fold-by-statistic table, one row per (method, statistic)
std::string cv_table(const CvReport& report) {
    std::ostringstream os;
    os << "statistic";
    for (int f = 1; f <= report.folds; ++f)
        os << ",fold" << f;
    os << '\n';
    static const char* const stats[] = {"mean", "min", "max"};
    for (const CvMethodReport& m : report.methods)
        for (int s = 0; s < 3; ++s) {
            os << method_name(m.method) << '/' << stats[s];
            for (const CvFoldStats& st : m.folds) {
                double v = s == 0 ? st.mean : (s == 1 ? st.min : st.max);
                os << ',' << fmt(v, 6);
            }
            os << '\n';
        }
    return os.str();
}

} // namespace

int cmd_recognize(const RunConfig& cfg, std::ostream& log) {
    FaceDataset data;
    const CvReport report = run_cv(cfg, methods_or_default(cfg), data);

    const std::string table = cv_table(report);
    write_text(cfg.out + ".csv", table);
    write_text(cfg.out + ".json", cv_json(report, cfg, data).dump(2) + "\n");

    log << "recognize " << cfg.input << ": " << data.count() << " images, "
        << data.label_names.size() << " classes, k=" << cfg.k << ", " << report.folds
        << " folds\n"
        << table;
    return 0;
}

int cmd_cross_validate(const RunConfig& cfg, std::ostream& log) {
    FaceDataset data;
    const CvReport report = run_cv(cfg, methods_or_default(cfg), data);

    std::string artifact;
    if (cfg.format == "json") {
        artifact = cv_json(report, cfg, data).dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "method,fold,trial,rate\n";
        for (const CvMethodReport& m : report.methods)
            for (std::size_t f = 0; f < m.folds.size(); ++f)
                for (std::size_t t = 0; t < m.folds[f].rates.size(); ++t)
                    os << method_name(m.method) << ',' << f + 1 << ',' << t + 1 << ','
                       << fmt(m.folds[f].rates[t], 6) << '\n';
        artifact = os.str();
    }
    write_text(cfg.out, artifact);

    log << "cross-validate " << cfg.input << ": k=" << cfg.k << ", " << report.folds
        << " folds, " << report.trials << " trials";
    for (const CvMethodReport& m : report.methods) {
        double acc = 0.0;
        for (const CvFoldStats& st : m.folds)
            acc += st.mean;
        log << "  " << method_name(m.method) << "=" << fmt(acc / m.folds.size(), 6);
    }
    log << " -> " << cfg.out << "\n";
    return 0;
}

int cmd_info(const RunConfig& cfg, std::ostream& log) {
    if (std::filesystem::is_directory(cfg.input)) {
        const FaceDataset data = load_image_dir(cfg.input);
        log << cfg.input << ": dataset of " << data.count() << " images ("
            << data.images.n1() << "x" << data.images.n3() << " pixels), "
            << data.label_names.size() << " classes\n";
        for (std::size_t c = 0; c < data.label_names.size(); ++c) {
            long n = std::count(data.labels.begin(), data.labels.end(), static_cast<int>(c));
            log << "  " << data.label_names[c] << ": " << n << " images\n";
        }
        return 0;
    }

    const Tensor3 t = load_tensor(cfg.input);
    double lo = 0.0, hi = 0.0;
    if (t.size() > 0) {
        lo = *std::min_element(t.data().begin(), t.data().end());
        hi = *std::max_element(t.data().begin(), t.data().end());
    }
    log << cfg.input << ": tensor " << t.n1() << "x" << t.n2() << "x" << t.n3()
        << ", frobenius norm " << fmt(frobenius_norm(t), 12) << ", entries in ["
        << fmt(lo, 6) << ", " << fmt(hi, 6) << "]\n";
    return 0;
}

} // namespace rtsvd
