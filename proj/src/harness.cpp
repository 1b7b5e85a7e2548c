#include "minmax/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "minmax/errors.hpp"

namespace minmax {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

ordered_json number_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

ordered_json optional_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

void write_file(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
    }
    fs::rename(tmp, path);
}

std::string trial_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trial_%03d", index);
    return buf;
}

std::string optional_csv(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

// Validates the problem spec and algorithm parameters; returns an exit code or 0.
int check_point(const ProblemSpec& spec, const AlgorithmConfig& algo, std::ostream& err) {
    try {
        Problem p(spec);
        (void)p;
        algo.wra.validate();
        algo.inner.validate();
        algo.outer.validate();
        algo.adv.validate();
        algo.zo.validate();
    } catch (const Unsupported& e) {
        err << "unsupported: " << e.what() << "\n";
        return 3;
    } catch (const InvalidInput& e) {
        err << "invalid config: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

ExperimentConfig with_overrides(ExperimentConfig c, const HarnessOptions& o) {
    if (o.seed) c.master_seed = *o.seed;
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.format) c.format = *o.format;
    return c;
}

} // namespace

std::uint64_t trial_seed(std::uint64_t master_seed, int index) {
    return master_seed ^ static_cast<std::uint64_t>(index);
}

std::vector<TrialRecord> run_batch(const ProblemSpec& spec, const AlgorithmConfig& algo, const RunOptions& run,
                                   int n_trials, std::uint64_t master_seed, int jobs) {
    const Problem problem(spec);
    std::vector<TrialRecord> records(static_cast<std::size_t>(std::max(n_trials, 0)));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < n_trials; i = next++) {
            try {
                records[static_cast<std::size_t>(i)] = run_trial(problem, algo, run, trial_seed(master_seed, i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n_workers = std::clamp(jobs, 1, std::max(n_trials, 1));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

std::string trace_csv(const TrialRecord& r) {
    std::string s = "fcalls,iteration,gap,best_approx_F,restarts\n";
    for (const auto& row : r.trace) {
        s += std::to_string(row.fcalls) + "," + std::to_string(row.iteration) + "," + format_double(row.gap) + "," +
             format_double(row.best_approx_F) + "," + std::to_string(row.restarts) + "\n";
    }
    return s;
}

std::string trace_json(const TrialRecord& r) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.trace)
        rows.push_back({{"fcalls", row.fcalls},
                        {"iteration", row.iteration},
                        {"gap", number_or_null(row.gap)},
                        {"best_approx_F", number_or_null(row.best_approx_F)},
                        {"restarts", row.restarts}});
    return rows.dump(1) + "\n";
}

std::string batch_summary_json(std::span<const TrialRecord> records, const BatchSummary& s) {
    ordered_json j;
    j["algorithm"] = s.algorithm;
    j["problem"] = {{"id", to_string(s.problem.id)},
                    {"dx", s.problem.dx},
                    {"dy", s.problem.dy},
                    {"matrix", to_string(s.problem.matrix)},
                    {"b", s.problem.b},
                    {"by", s.problem.by},
                    {"bounded", s.problem.bounded}};
    j["n_trials"] = s.n_trials;
    j["n_success"] = s.n_success;
    j["median_fcalls"] = optional_json(s.median_fcalls);
    j["q25_fcalls"] = optional_json(s.q25_fcalls);
    j["q75_fcalls"] = optional_json(s.q75_fcalls);
    ordered_json trials = ordered_json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        ordered_json t;
        t["index"] = i;
        t["seed"] = r.seed;
        t["success"] = r.success;
        t["fcalls_to_success"] =
            r.fcalls_to_success ? ordered_json(*r.fcalls_to_success) : ordered_json(nullptr);
        t["fcalls_used"] = r.fcalls_used;
        t["iterations"] = r.iterations;
        t["restarts"] = r.restarts;
        t["final_gap"] = number_or_null(r.final_gap);
        t["best_gap"] = number_or_null(r.best_gap);
        t["stop_reason"] = r.stop_reason;
        t["certification_fcalls"] = r.certification_fcalls;
        t["final_x"] = r.final_x;
        trials.push_back(std::move(t));
    }
    j["trials"] = std::move(trials);
    ordered_json curve;
    curve["fcalls"] = s.curve.fcalls;
    ordered_json q25 = ordered_json::array(), q50 = ordered_json::array(), q75 = ordered_json::array();
    for (std::size_t i = 0; i < s.curve.fcalls.size(); ++i) {
        q25.push_back(number_or_null(s.curve.q25[i]));
        q50.push_back(number_or_null(s.curve.q50[i]));
        q75.push_back(number_or_null(s.curve.q75[i]));
    }
    curve["q25"] = std::move(q25);
    curve["q50"] = std::move(q50);
    curve["q75"] = std::move(q75);
    j["gap_curve"] = std::move(curve);
    return j.dump(2) + "\n";
}

std::string summary_csv_row(const BatchSummary& s) {
    return to_string(s.problem.id) + "," + s.algorithm + "," + format_double(s.problem.b) + "," +
           std::to_string(s.problem.dx) + "," + std::to_string(s.problem.dy) + "," + std::to_string(s.n_success) +
           "," + std::to_string(s.n_trials) + "," + optional_csv(s.median_fcalls) + "," + optional_csv(s.q25_fcalls) +
           "," + optional_csv(s.q75_fcalls);
}

int cmd_run(const ExperimentConfig& base, const HarnessOptions& options, std::ostream& out, std::ostream& err) {
    const ExperimentConfig c = with_overrides(base, options);
    if (c.format != "csv" && c.format != "json") {
        err << "invalid config: format must be csv or json\n";
        return 2;
    }
    for (const auto alg : c.algorithms) {
        AlgorithmConfig algo = c.params;
        algo.algorithm = alg;
        if (const int code = check_point(c.problem, algo, err)) return code;
    }
    fs::create_directories(c.out_dir);
    const bool single = c.algorithms.size() == 1;
    ordered_json summary = ordered_json::array();
    for (const auto alg : c.algorithms) {
        AlgorithmConfig algo = c.params;
        algo.algorithm = alg;
        const auto records = run_batch(c.problem, algo, c.run, c.n_trials, c.master_seed, options.jobs);
        const std::string prefix = single ? "" : to_string(alg) + "_";
        for (int i = 0; i < c.n_trials; ++i) {
            const auto& r = records[static_cast<std::size_t>(i)];
            if (c.format == "csv")
                write_file(fs::path(c.out_dir) / (prefix + trial_name(i) + ".csv"), trace_csv(r));
            else
                write_file(fs::path(c.out_dir) / (prefix + trial_name(i) + ".json"), trace_json(r));
        }
        const BatchSummary s = aggregate(records);
        summary.push_back(ordered_json::parse(batch_summary_json(records, s)));
        out << to_string(alg) << ": " << s.n_success << "/" << s.n_trials << " successful";
        if (s.median_fcalls) out << ", median f-calls " << format_double(*s.median_fcalls);
        out << "\n";
    }
    write_file(fs::path(c.out_dir) / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int cmd_bench(const ExperimentConfig& base, const HarnessOptions& options, std::ostream& out, std::ostream& err) {
    const ExperimentConfig c = with_overrides(base, options);
    const auto points = expand_sweep(c);
    for (const auto& p : points)
        if (const int code = check_point(p.problem, p.algo, err)) return code;

    const fs::path dir = fs::path(c.out_dir) / "points";
    fs::create_directories(dir);
    std::string csv = std::string(kSummaryCsvHeader) + "\n";
    for (const auto& p : points) {
        const fs::path file = dir / (p.key + ".json");
        std::string row;
        if (fs::exists(file)) {
            std::ifstream in(file);
            const auto j = ordered_json::parse(in, nullptr, false);
            if (!j.is_discarded() && j.contains("row")) {
                row = j["row"].get<std::string>();
                out << p.key << ": done, skipped\n";
            }
        }
        if (row.empty()) {
            const auto records = run_batch(p.problem, p.algo, c.run, c.n_trials, c.master_seed, options.jobs);
            const BatchSummary s = aggregate(records);
            row = summary_csv_row(s);
            ordered_json j = ordered_json::parse(batch_summary_json(records, s));
            j["key"] = p.key;
            j["row"] = row;
            write_file(file, j.dump(2) + "\n");
            out << p.key << ": " << s.n_success << "/" << s.n_trials << "\n";
        }
        csv += row + "\n";
    }
    write_file(fs::path(c.out_dir) / "summary.csv", csv);
    return 0;
}

namespace {

bool read_solution(const std::string& path, Vector& x, std::string& error) {
    std::ifstream in(path);
    if (!in) {
        error = "cannot open solution file '" + path + "'";
        return false;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        const auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_array()) {
            error = "solution file is not a JSON array";
            return false;
        }
        for (const auto& v : j) {
            if (!v.is_number()) {
                error = "solution entries must be numbers";
                return false;
            }
            x.push_back(v.get<double>());
        }
        return true;
    }
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        for (auto& ch : tok)
            if (ch == ',') ch = ' ';
        std::istringstream ts(tok);
        double v;
        while (ts >> v) x.push_back(v);
        if (!ts.eof()) {
            error = "unreadable number '" + tok + "'";
            return false;
        }
    }
    return true;
}

} // namespace

int cmd_eval(const ExperimentConfig& c, const EvalOptions& o, std::ostream& out, std::ostream& err) {
    std::optional<Problem> problem;
    try {
        problem.emplace(c.problem);
    } catch (const Unsupported& e) {
        err << "unsupported: " << e.what() << "\n";
        return 3;
    } catch (const InvalidInput& e) {
        err << "invalid config: " << e.what() << "\n";
        return 2;
    }
    Vector x;
    std::string error;
    if (!read_solution(o.solution_path, x, error)) {
        err << error << "\n";
        return 2;
    }
    if (x.size() != problem->dx()) {
        err << "dimension mismatch: solution has " << x.size() << " entries, problem expects " << problem->dx()
            << "\n";
        return 2;
    }
    if (!all_finite(x)) {
        err << "solution contains non-finite values\n";
        return 2;
    }
    Rng rng(o.seed);
    const double closed = certify_worst_case(*problem, x, CertifyProtocol{CertifyKind::ClosedForm}, rng);
    FcallCounter counter;
    const double multi = certify_worst_case(
        *problem, x, CertifyProtocol{CertifyKind::Multistart, o.n_starts, o.budget_per_start}, rng, &counter);
    const double gap = std::abs(closed - problem->optimum().F_star);
    if (o.json) {
        ordered_json j;
        j["problem"] = to_string(problem->id());
        j["closed_form"] = number_or_null(closed);
        j["multistart"] = number_or_null(multi);
        j["multistart_fcalls"] = counter.count();
        j["abs_difference"] = number_or_null(std::abs(closed - multi));
        j["F_star"] = number_or_null(problem->optimum().F_star);
        j["gap"] = number_or_null(gap);
        out << j.dump(2) << "\n";
    } else {
        out << "closed-form worst case: " << format_double(closed) << "\n"
            << "multistart worst case:  " << format_double(multi) << " (" << o.n_starts << " starts, "
            << counter.count() << " f-calls)\n"
            << "|difference|:           " << format_double(std::abs(closed - multi)) << "\n"
            << "F*:                     " << format_double(problem->optimum().F_star) << "\n"
            << "gap:                    " << format_double(gap) << "\n";
    }
    return 0;
}

int cmd_list(bool json, std::ostream& out) {
    ordered_json arr = ordered_json::array();
    for (int i = 1; i <= 11; ++i) {
        ProblemSpec spec;
        spec.id = static_cast<ProblemId>(i);
        const Problem p(spec);
        std::vector<std::string> kinds{"diag"};
        if (spec.id != ProblemId::F3 && spec.id != ProblemId::F10 && spec.id != ProblemId::F11)
            kinds.push_back("band");
        arr.push_back({{"id", to_string(spec.id)},
                       {"category", std::string(1, to_char(p.category()))},
                       {"dx", spec.dx},
                       {"dy", spec.dy},
                       {"matrix", kinds},
                       {"unbounded", spec.id == ProblemId::F5 || spec.id == ProblemId::F7 ||
                                         spec.id == ProblemId::F11}});
    }
    if (json) {
        out << arr.dump(2) << "\n";
        return 0;
    }
    out << "id   category  dx  dy  matrix     unbounded\n";
    for (const auto& e : arr) {
        std::string kinds;
        for (const auto& k : e["matrix"]) kinds += (kinds.empty() ? "" : ",") + k.get<std::string>();
        out << std::left << std::setw(5) << e["id"].get<std::string>() << std::setw(10)
            << e["category"].get<std::string>() << std::setw(4) << e["dx"].get<std::size_t>() << std::setw(4)
            << e["dy"].get<std::size_t>() << std::setw(11) << kinds << (e["unbounded"].get<bool>() ? "yes" : "no")
            << "\n";
    }
    return 0;
}

} // namespace minmax
