#include "minmax/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "minmax/errors.hpp"

namespace minmax {

using nlohmann::json;
using nlohmann::ordered_json;

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

using Path = std::vector<std::string>;

std::string join(const Path& p) {
    std::string s;
    for (const auto& k : p) s += (s.empty() ? "" : ".") + k;
    return s;
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    int line_of(std::size_t pos) const {
        int line = 1;
        for (std::size_t i = 0; i < pos && i < text_.size(); ++i)
            if (text_[i] == '\n') ++line;
        return line;
    }

    // Position of the key named by the path, searching each component after its parent.
    int line_of(const Path& path) const {
        std::size_t from = 0;
        std::size_t found = std::string::npos;
        for (const auto& k : path) {
            const std::string quoted = "\"" + k + "\"";
            std::size_t pos = from;
            found = std::string::npos;
            while ((pos = text_.find(quoted, pos)) != std::string::npos) {
                std::size_t after = pos + quoted.size();
                while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
                if (after < text_.size() && text_[after] == ':') {
                    found = pos;
                    break;
                }
                pos += quoted.size();
            }
            if (found == std::string::npos) return 0;
            from = found + quoted.size();
        }
        return line_of(found);
    }

    [[noreturn]] void fail(const Path& path, const std::string& what) const {
        throw ConfigError(line_of(path), "'" + join(path) + "': " + what);
    }

    void check_keys(const json& obj, const Path& path, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items()) {
            (void)v;
            if (!ok.count(k)) {
                Path p = path;
                p.push_back(k);
                throw ConfigError(line_of(p), "unknown key '" + join(p) + "'");
            }
        }
    }

    double number(const json& v, const Path& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    std::int64_t integer(const json& v, const Path& path) const {
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::floor(d) == d && std::abs(d) < 9.2e18) return static_cast<std::int64_t>(d);
        }
        fail(path, "expected an integer");
    }

    std::size_t count(const json& v, const Path& path) const {
        const auto n = integer(v, path);
        if (n < 0) fail(path, "expected a non-negative integer");
        return static_cast<std::size_t>(n);
    }

    bool boolean(const json& v, const Path& path) const {
        if (!v.is_boolean()) fail(path, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const json& v, const Path& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    template <class T, class F>
    std::vector<T> list(const json& v, const Path& path, F&& item) const {
        if (!v.is_array()) fail(path, "expected a list");
        if (v.empty()) fail(path, "sweep axis must not be empty");
        std::vector<T> out;
        for (const auto& e : v) out.push_back(item(e, path));
        return out;
    }

private:
    const std::string& text_;
};

// Applies `fn` to obj[key] when present.
template <class F>
void with(const json& obj, const Path& parent, const char* key, F&& fn) {
    const auto it = obj.find(key);
    if (it == obj.end()) return;
    Path p = parent;
    p.push_back(key);
    fn(*it, p);
}

void read_problem(const Reader& r, const json& o, const Path& at, ProblemSpec& s) {
    r.check_keys(o, at, {"id", "dx", "dy", "d", "matrix", "b", "by", "x_lower", "x_upper", "bounded", "gamma"});
    with(o, at, "id", [&](const json& v, const Path& p) {
        try {
            s.id = parse_problem_id(r.string(v, p));
        } catch (const InvalidInput& e) {
            r.fail(p, e.what());
        }
    });
    with(o, at, "d", [&](const json& v, const Path& p) { s.dx = s.dy = r.count(v, p); });
    with(o, at, "dx", [&](const json& v, const Path& p) { s.dx = r.count(v, p); });
    with(o, at, "dy", [&](const json& v, const Path& p) { s.dy = r.count(v, p); });
    with(o, at, "matrix", [&](const json& v, const Path& p) {
        try {
            s.matrix = parse_matrix_kind(r.string(v, p));
        } catch (const InvalidInput& e) {
            r.fail(p, e.what());
        }
    });
    with(o, at, "b", [&](const json& v, const Path& p) { s.b = r.number(v, p); });
    with(o, at, "by", [&](const json& v, const Path& p) { s.by = r.number(v, p); });
    with(o, at, "x_lower", [&](const json& v, const Path& p) { s.x_lower = r.number(v, p); });
    with(o, at, "x_upper", [&](const json& v, const Path& p) { s.x_upper = r.number(v, p); });
    with(o, at, "bounded", [&](const json& v, const Path& p) { s.bounded = r.boolean(v, p); });
    with(o, at, "gamma", [&](const json& v, const Path& p) { s.gamma = r.number(v, p); });
}

void read_wra(const Reader& r, const json& o, const Path& at, WraParams& w) {
    r.check_keys(o, at, {"tau_threshold", "p_threshold", "p_plus", "p_minus", "max_rounds"});
    with(o, at, "tau_threshold", [&](const json& v, const Path& p) { w.tau_threshold = r.number(v, p); });
    with(o, at, "p_threshold", [&](const json& v, const Path& p) { w.p_threshold = r.number(v, p); });
    with(o, at, "p_plus", [&](const json& v, const Path& p) { w.p_plus = r.number(v, p); });
    with(o, at, "p_minus", [&](const json& v, const Path& p) { w.p_minus = r.number(v, p); });
    with(o, at, "max_rounds", [&](const json& v, const Path& p) { w.max_rounds = static_cast<int>(r.integer(v, p)); });
}

void read_inner(const Reader& r, const json& o, const Path& at, InnerSolverParams& s) {
    r.check_keys(o, at,
                 {"c_max", "v_min_y", "t_min", "cond_max_y", "u_min", "beta", "fd_step", "eta0", "lambda_y"});
    with(o, at, "c_max", [&](const json& v, const Path& p) { s.c_max = static_cast<int>(r.integer(v, p)); });
    with(o, at, "v_min_y", [&](const json& v, const Path& p) { s.v_min_y = r.number(v, p); });
    with(o, at, "t_min", [&](const json& v, const Path& p) { s.t_min = static_cast<int>(r.integer(v, p)); });
    with(o, at, "cond_max_y", [&](const json& v, const Path& p) { s.cond_max_y = r.number(v, p); });
    with(o, at, "u_min", [&](const json& v, const Path& p) { s.u_min = r.number(v, p); });
    with(o, at, "beta", [&](const json& v, const Path& p) { s.beta = r.number(v, p); });
    with(o, at, "fd_step", [&](const json& v, const Path& p) { s.fd_step = r.number(v, p); });
    with(o, at, "eta0", [&](const json& v, const Path& p) { s.eta0 = r.number(v, p); });
    with(o, at, "lambda_y", [&](const json& v, const Path& p) {
        if (v.is_null())
            s.lambda_y.reset();
        else
            s.lambda_y = r.count(v, p);
    });
}

void read_outer(const Reader& r, const json& o, const Path& at, OuterOptions& s) {
    r.check_keys(o, at,
                 {"v_min_x", "cond_max_x", "lambda_x", "n_omega", "stagnation", "stagnation_window", "stagnation_tol"});
    with(o, at, "v_min_x", [&](const json& v, const Path& p) { s.v_min_x = r.number(v, p); });
    with(o, at, "cond_max_x", [&](const json& v, const Path& p) { s.cond_max_x = r.number(v, p); });
    with(o, at, "lambda_x", [&](const json& v, const Path& p) {
        if (v.is_null())
            s.lambda_x.reset();
        else
            s.lambda_x = r.count(v, p);
    });
    with(o, at, "n_omega", [&](const json& v, const Path& p) { s.n_omega = r.count(v, p); });
    with(o, at, "stagnation", [&](const json& v, const Path& p) { s.stagnation = r.boolean(v, p); });
    with(o, at, "stagnation_window",
         [&](const json& v, const Path& p) { s.stagnation_window = static_cast<int>(r.integer(v, p)); });
    with(o, at, "stagnation_tol", [&](const json& v, const Path& p) { s.stagnation_tol = r.number(v, p); });
}

void read_adv(const Reader& r, const json& o, const Path& at, AdvCmaConfig& s) {
    r.check_keys(o, at, {"g_tol", "eta_min", "sigma_min", "eta0", "inner_budget_factor"});
    with(o, at, "g_tol", [&](const json& v, const Path& p) { s.g_tol = r.number(v, p); });
    with(o, at, "eta_min", [&](const json& v, const Path& p) { s.eta_min = r.number(v, p); });
    with(o, at, "sigma_min", [&](const json& v, const Path& p) { s.sigma_min = r.number(v, p); });
    with(o, at, "eta0", [&](const json& v, const Path& p) { s.eta0 = r.number(v, p); });
    with(o, at, "inner_budget_factor",
         [&](const json& v, const Path& p) { s.inner_budget_factor = static_cast<int>(r.integer(v, p)); });
}

void read_zo(const Reader& r, const json& o, const Path& at, ZoPgdaConfig& s) {
    r.check_keys(o, at, {"eta_x", "eta_y", "q", "mu", "restart", "restart_tol"});
    with(o, at, "eta_x", [&](const json& v, const Path& p) { s.eta_x = r.number(v, p); });
    with(o, at, "eta_y", [&](const json& v, const Path& p) { s.eta_y = r.number(v, p); });
    with(o, at, "q", [&](const json& v, const Path& p) { s.q = static_cast<int>(r.integer(v, p)); });
    with(o, at, "mu", [&](const json& v, const Path& p) { s.mu = r.number(v, p); });
    with(o, at, "restart", [&](const json& v, const Path& p) { s.restart = r.boolean(v, p); });
    with(o, at, "restart_tol", [&](const json& v, const Path& p) { s.restart_tol = r.number(v, p); });
}

void read_sweep(const Reader& r, const json& o, const Path& at, SweepAxes& s) {
    r.check_keys(o, at, {"b", "d", "dx", "dy", "n_omega", "c_max", "tau_threshold", "p_plus", "p_minus"});
    const auto num = [&](const json& e, const Path& p) { return r.number(e, p); };
    const auto cnt = [&](const json& e, const Path& p) { return r.count(e, p); };
    const auto itg = [&](const json& e, const Path& p) { return static_cast<int>(r.integer(e, p)); };
    with(o, at, "b", [&](const json& v, const Path& p) { s.b = r.list<double>(v, p, num); });
    with(o, at, "d", [&](const json& v, const Path& p) { s.d = r.list<std::size_t>(v, p, cnt); });
    with(o, at, "dx", [&](const json& v, const Path& p) { s.dx = r.list<std::size_t>(v, p, cnt); });
    with(o, at, "dy", [&](const json& v, const Path& p) { s.dy = r.list<std::size_t>(v, p, cnt); });
    with(o, at, "n_omega", [&](const json& v, const Path& p) { s.n_omega = r.list<std::size_t>(v, p, cnt); });
    with(o, at, "c_max", [&](const json& v, const Path& p) { s.c_max = r.list<int>(v, p, itg); });
    with(o, at, "tau_threshold", [&](const json& v, const Path& p) { s.tau_threshold = r.list<double>(v, p, num); });
    with(o, at, "p_plus", [&](const json& v, const Path& p) { s.p_plus = r.list<double>(v, p, num); });
    with(o, at, "p_minus", [&](const json& v, const Path& p) { s.p_minus = r.list<double>(v, p, num); });
}

// Runs a validate() and reports failures against the section key.
template <class F>
void validated(const Reader& r, const Path& path, F&& fn) {
    try {
        fn();
    } catch (const InvalidInput& e) {
        r.fail(path, e.what());
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        Reader r(text);
        throw ConfigError(r.line_of(e.byte > 0 ? e.byte - 1 : 0), std::string("malformed config: ") + e.what());
    }
    const Reader r(text);
    ExperimentConfig c;
    const Path top;
    r.check_keys(root, top,
                 {"problem", "algorithms", "budget", "n_trials", "master_seed", "target_gap", "stop_on_target",
                  "restarts", "certify_random_scenarios", "wra", "inner", "outer", "adv", "zopgda", "sweep", "output"});

    with(root, top, "problem", [&](const json& v, const Path& p) { read_problem(r, v, p, c.problem); });
    with(root, top, "algorithms", [&](const json& v, const Path& p) {
        c.algorithms = r.list<Algorithm>(v, p, [&](const json& e, const Path& q) {
            try {
                return parse_algorithm(r.string(e, q));
            } catch (const InvalidInput& err) {
                r.fail(q, err.what());
            }
        });
    });
    with(root, top, "budget", [&](const json& v, const Path& p) {
        c.run.budget = r.integer(v, p);
        if (c.run.budget < 1) r.fail(p, "budget must be positive");
    });
    with(root, top, "n_trials", [&](const json& v, const Path& p) {
        c.n_trials = static_cast<int>(r.integer(v, p));
        if (c.n_trials < 1) r.fail(p, "n_trials must be at least 1");
    });
    with(root, top, "master_seed", [&](const json& v, const Path& p) {
        if (v.is_number_unsigned())
            c.master_seed = v.get<std::uint64_t>();
        else
            c.master_seed = static_cast<std::uint64_t>(r.count(v, p));
    });
    with(root, top, "target_gap", [&](const json& v, const Path& p) {
        c.run.target_gap = r.number(v, p);
        if (!(c.run.target_gap >= 0.0)) r.fail(p, "target_gap must be non-negative");
    });
    with(root, top, "stop_on_target", [&](const json& v, const Path& p) { c.run.stop_on_target = r.boolean(v, p); });
    with(root, top, "restarts", [&](const json& v, const Path& p) { c.run.restarts = r.boolean(v, p); });
    with(root, top, "certify_random_scenarios", [&](const json& v, const Path& p) {
        c.run.certify_random_scenarios = static_cast<int>(r.count(v, p));
    });
    with(root, top, "wra", [&](const json& v, const Path& p) {
        read_wra(r, v, p, c.params.wra);
        validated(r, p, [&] { c.params.wra.validate(); });
    });
    with(root, top, "inner", [&](const json& v, const Path& p) {
        read_inner(r, v, p, c.params.inner);
        validated(r, p, [&] { c.params.inner.validate(); });
    });
    with(root, top, "outer", [&](const json& v, const Path& p) {
        read_outer(r, v, p, c.params.outer);
        validated(r, p, [&] { c.params.outer.validate(); });
    });
    with(root, top, "adv", [&](const json& v, const Path& p) {
        read_adv(r, v, p, c.params.adv);
        validated(r, p, [&] { c.params.adv.validate(); });
    });
    with(root, top, "zopgda", [&](const json& v, const Path& p) {
        read_zo(r, v, p, c.params.zo);
        validated(r, p, [&] { c.params.zo.validate(); });
    });
    with(root, top, "sweep", [&](const json& v, const Path& p) { read_sweep(r, v, p, c.sweep); });
    with(root, top, "output", [&](const json& v, const Path& p) {
        r.check_keys(v, p, {"dir", "format"});
        with(v, p, "dir", [&](const json& e, const Path& q) { c.out_dir = r.string(e, q); });
        with(v, p, "format", [&](const json& e, const Path& q) {
            c.format = r.string(e, q);
            if (c.format != "csv" && c.format != "json") r.fail(q, "format must be csv or json");
        });
    });
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    ordered_json j;
    const ProblemSpec& s = c.problem;
    j["problem"] = {{"id", to_string(s.id)}, {"dx", s.dx},           {"dy", s.dy},
                    {"matrix", to_string(s.matrix)}, {"b", s.b},     {"by", s.by},
                    {"x_lower", s.x_lower},          {"x_upper", s.x_upper}, {"bounded", s.bounded},
                    {"gamma", s.gamma}};
    ordered_json algs = ordered_json::array();
    for (auto a : c.algorithms) algs.push_back(to_string(a));
    j["algorithms"] = algs;
    j["budget"] = c.run.budget;
    j["n_trials"] = c.n_trials;
    j["master_seed"] = c.master_seed;
    j["target_gap"] = c.run.target_gap;
    j["stop_on_target"] = c.run.stop_on_target;
    j["restarts"] = c.run.restarts;
    j["certify_random_scenarios"] = c.run.certify_random_scenarios;
    const auto& w = c.params.wra;
    j["wra"] = {{"tau_threshold", w.tau_threshold},
                {"p_threshold", w.p_threshold},
                {"p_plus", w.p_plus},
                {"p_minus", w.p_minus},
                {"max_rounds", w.max_rounds}};
    const auto& in = c.params.inner;
    j["inner"] = {{"c_max", in.c_max},     {"v_min_y", in.v_min_y}, {"t_min", in.t_min},
                  {"cond_max_y", in.cond_max_y}, {"u_min", in.u_min}, {"beta", in.beta},
                  {"fd_step", in.fd_step}, {"eta0", in.eta0}};
    j["inner"]["lambda_y"] = in.lambda_y ? ordered_json(*in.lambda_y) : ordered_json(nullptr);
    const auto& o = c.params.outer;
    j["outer"] = {{"v_min_x", o.v_min_x}, {"cond_max_x", o.cond_max_x}};
    j["outer"]["lambda_x"] = o.lambda_x ? ordered_json(*o.lambda_x) : ordered_json(nullptr);
    j["outer"]["n_omega"] = o.n_omega;
    j["outer"]["stagnation"] = o.stagnation;
    j["outer"]["stagnation_window"] = o.stagnation_window;
    j["outer"]["stagnation_tol"] = o.stagnation_tol;
    const auto& a = c.params.adv;
    j["adv"] = {{"g_tol", a.g_tol},
                {"eta_min", a.eta_min},
                {"sigma_min", a.sigma_min},
                {"eta0", a.eta0},
                {"inner_budget_factor", a.inner_budget_factor}};
    const auto& z = c.params.zo;
    j["zopgda"] = {{"eta_x", z.eta_x}, {"eta_y", z.eta_y},     {"q", z.q},
                   {"mu", z.mu},       {"restart", z.restart}, {"restart_tol", z.restart_tol}};
    ordered_json sw = ordered_json::object();
    const auto put = [&sw](const char* k, const auto& v) {
        if (!v.empty()) sw[k] = v;
    };
    put("b", c.sweep.b);
    put("d", c.sweep.d);
    put("dx", c.sweep.dx);
    put("dy", c.sweep.dy);
    put("n_omega", c.sweep.n_omega);
    put("c_max", c.sweep.c_max);
    put("tau_threshold", c.sweep.tau_threshold);
    put("p_plus", c.sweep.p_plus);
    put("p_minus", c.sweep.p_minus);
    j["sweep"] = sw;
    j["output"] = {{"dir", c.out_dir}, {"format", c.format}};
    return j.dump(2) + "\n";
}

std::vector<ConfigPoint> expand_sweep(const ExperimentConfig& c) {
    // each axis as a list of setters; an absent axis contributes one no-op
    using Setter = std::function<void(ConfigPoint&)>;
    std::vector<std::vector<std::pair<std::string, Setter>>> axes;
    const auto axis = [&axes](const std::string& tag, const auto& values, auto apply) {
        std::vector<std::pair<std::string, Setter>> opts;
        for (const auto& v : values) {
            std::string label;
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
                label = tag + format_double(v);
            else
                label = tag + std::to_string(v);
            opts.emplace_back(label, [apply, v](ConfigPoint& p) { apply(p, v); });
        }
        if (!opts.empty()) axes.push_back(std::move(opts));
    };
    axis("b", c.sweep.b, [](ConfigPoint& p, double v) { p.problem.b = v; });
    axis("d", c.sweep.d, [](ConfigPoint& p, std::size_t v) { p.problem.dx = p.problem.dy = v; });
    axis("dx", c.sweep.dx, [](ConfigPoint& p, std::size_t v) { p.problem.dx = v; });
    axis("dy", c.sweep.dy, [](ConfigPoint& p, std::size_t v) { p.problem.dy = v; });
    axis("nw", c.sweep.n_omega, [](ConfigPoint& p, std::size_t v) { p.algo.outer.n_omega = v; });
    axis("cmax", c.sweep.c_max, [](ConfigPoint& p, int v) { p.algo.inner.c_max = v; });
    axis("tau", c.sweep.tau_threshold, [](ConfigPoint& p, double v) { p.algo.wra.tau_threshold = v; });
    axis("pp", c.sweep.p_plus, [](ConfigPoint& p, double v) { p.algo.wra.p_plus = v; });
    axis("pm", c.sweep.p_minus, [](ConfigPoint& p, double v) { p.algo.wra.p_minus = v; });

    std::vector<ConfigPoint> out;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        for (const auto alg : c.algorithms) {
            ConfigPoint p;
            p.problem = c.problem;
            p.algo = c.params;
            p.algo.algorithm = alg;
            std::string key = to_string(c.problem.id) + "_" + to_string(alg);
            for (std::size_t a = 0; a < axes.size(); ++a) {
                axes[a][idx[a]].second(p);
                key += "_" + axes[a][idx[a]].first;
            }
            for (auto& ch : key)
                if (ch == '+') ch = '-';
            p.key = key;
            out.push_back(std::move(p));
        }
        std::size_t a = 0;
        while (a < axes.size() && ++idx[a] == axes[a].size()) idx[a++] = 0;
        if (a == axes.size()) break;
    }
    return out;
}

} // namespace minmax
