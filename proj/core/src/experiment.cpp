#include "linrmdp/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "linrmdp/drop_solver.hpp"
#include "linrmdp/dropv_solver.hpp"
#include "linrmdp/robust_oracle.hpp"
#include "linrmdp/rng.hpp"
#include "linrmdp/serialization.hpp"

namespace linrmdp {

using nlohmann::json;

std::string to_string(SolverKind kind) {
    return kind == SolverKind::drop ? "drop" : "drop-v";
}

SolverKind solver_kind_from_string(const std::string& name) {
    if (name == "drop") return SolverKind::drop;
    if (name == "drop-v") return SolverKind::drop_v;
    throw ValidationError("unknown solver: " + name + " (expected drop or drop-v)");
}

namespace {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("CSV: bad number: " + s);
    return x;
}

long long parse_ll(const std::string& s) {
    long long x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("CSV: bad integer: " + s);
    return x;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("CSV: bad seed: " + s);
    return x;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw ValidationError(std::string("config: unknown key \"") + item.key() + "\" in " +
                                  where);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty set");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    reject_unknown_keys(doc, {"instance", "solver", "rho", "K", "seeds", "delta", "behavior",
                              "overrides"},
                        "top level");
    for (const char* key : {"instance", "solver", "rho", "K", "seeds", "delta"})
        if (!doc.contains(key)) throw ValidationError(std::string("config missing key: ") + key);

    ExperimentConfig cfg;

    const json& inst = doc["instance"];
    reject_unknown_keys(inst, {"file", "random"}, "instance");
    if (inst.contains("file") == inst.contains("random"))
        throw ValidationError("config: instance needs exactly one of \"file\" or \"random\"");
    if (inst.contains("file")) {
        cfg.instance_file = inst["file"].get<std::string>();
    } else {
        const json& rnd = inst["random"];
        reject_unknown_keys(rnd, {"seed", "S", "A", "H", "d", "rho"}, "instance.random");
        ExperimentConfig::RandomInstanceSpec spec;
        spec.seed = rnd.at("seed").get<std::uint64_t>();
        spec.num_states = rnd.at("S").get<int>();
        spec.num_actions = rnd.at("A").get<int>();
        spec.horizon = rnd.at("H").get<int>();
        spec.dim = rnd.at("d").get<int>();
        spec.rho = rnd.value("rho", 0.0);
        cfg.random_instance_spec = spec;
    }

    cfg.solver = solver_kind_from_string(doc["solver"].get<std::string>());
    cfg.rho_list = doc["rho"].get<std::vector<double>>();
    cfg.k_list = doc["K"].get<std::vector<int>>();
    cfg.seed_list = doc["seeds"].get<std::vector<std::uint64_t>>();
    cfg.delta = doc["delta"].get<double>();
    if (cfg.rho_list.empty() || cfg.k_list.empty() || cfg.seed_list.empty())
        throw ValidationError("config: rho, K and seeds must be nonempty");
    for (double rho : cfg.rho_list)
        if (rho < 0.0) throw ValidationError("config: rho entries must be nonnegative");
    for (int k : cfg.k_list)
        if (k < 2) throw ValidationError("config: K entries must be at least 2");
    if (cfg.delta <= 0.0 || cfg.delta >= 1.0)
        throw ValidationError("config: delta must lie in (0,1)");

    if (doc.contains("behavior")) {
        const json& beh = doc["behavior"];
        reject_unknown_keys(beh, {"type", "epsilon"}, "behavior");
        const std::string type = beh.at("type").get<std::string>();
        if (type == "uniform") {
            cfg.behavior.kind = BehaviorSpec::Kind::uniform;
        } else if (type == "epsilon_greedy") {
            cfg.behavior.kind = BehaviorSpec::Kind::epsilon_greedy;
            cfg.behavior.epsilon = beh.at("epsilon").get<double>();
            if (cfg.behavior.epsilon < 0.0 || cfg.behavior.epsilon > 1.0)
                throw ValidationError("config: behavior.epsilon must lie in [0,1]");
        } else {
            throw ValidationError("config: behavior.type must be uniform or epsilon_greedy");
        }
    }

    if (doc.contains("overrides")) {
        const json& ov = doc["overrides"];
        reject_unknown_keys(ov, {"lambda0", "gamma0", "lambda1", "gamma1"}, "overrides");
        if (ov.contains("lambda0")) cfg.lambda0 = ov["lambda0"].get<double>();
        if (ov.contains("gamma0")) cfg.gamma0 = ov["gamma0"].get<double>();
        if (ov.contains("lambda1")) cfg.lambda1 = ov["lambda1"].get<double>();
        if (ov.contains("gamma1")) cfg.gamma1 = ov["gamma1"].get<double>();
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from_json(read_file(path));
}

namespace {

struct RhoContext {
    LinRmdpInstance instance;   // radius set to the cell rho
    RobustSolution solution;
    StochasticPolicy behavior;
};

} // namespace

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
    LinRmdpInstance base;
    if (cfg.instance_file.has_value()) {
        base = load_instance(*cfg.instance_file);
    } else {
        const auto& spec = *cfg.random_instance_spec;
        base = random_instance(spec.seed, spec.num_states, spec.num_actions, spec.horizon,
                               spec.dim, spec.rho);
    }
    require_valid(base);
    const FeatureView view = feature_view(base);

    // exact solutions and behavior policies are shared across cells per rho
    std::map<double, RhoContext> per_rho;
    for (double rho : cfg.rho_list) {
        if (per_rho.count(rho) != 0) continue;
        RhoContext ctx;
        ctx.instance = with_radius(base, rho);
        ctx.solution = robust_value_iteration(ctx.instance);
        ctx.behavior = cfg.behavior.kind == BehaviorSpec::Kind::uniform
                           ? uniform_policy(base.horizon, base.num_states, base.num_actions)
                           : epsilon_greedy(ctx.solution.pi_star, base.num_actions,
                                            cfg.behavior.epsilon);
        per_rho.emplace(rho, std::move(ctx));
    }

    std::vector<ExperimentRecord> records;
    records.reserve(cfg.seed_list.size() * cfg.k_list.size() * cfg.rho_list.size());
    for (std::uint64_t seed : cfg.seed_list) {
        for (int K : cfg.k_list) {
            for (double rho : cfg.rho_list) {
                const RhoContext& ctx = per_rho.at(rho);
                const std::uint64_t cell_key =
                    mix64(mix64(static_cast<std::uint64_t>(K)) ^ std::bit_cast<std::uint64_t>(rho));
                const std::uint64_t data_seed = derive_seed(seed, cell_key, seed_tag::data_gen);
                const std::uint64_t sub_seed =
                    derive_seed(seed, cell_key, seed_tag::experiment_cell);

                const OfflineDataset data = generate(ctx.instance, ctx.behavior, K, data_seed);

                const auto t0 = std::chrono::steady_clock::now();
                SolverOutput out;
                if (cfg.solver == SolverKind::drop) {
                    const OfflineDataset d0 = two_fold_subsample(
                        data, base.num_states, SubsampleConfig{cfg.delta, sub_seed});
                    DropConfig dc;
                    dc.rho = ctx.instance.rho;
                    dc.delta = cfg.delta;
                    dc.num_trajectories = K;
                    dc.lambda0 = cfg.lambda0;
                    dc.gamma0 = cfg.gamma0;
                    out = fit(view, d0, dc);
                } else {
                    DropVConfig dc;
                    dc.rho = ctx.instance.rho;
                    dc.delta = cfg.delta;
                    dc.num_trajectories = K;
                    dc.lambda1 = cfg.lambda1;
                    dc.gamma1 = cfg.gamma1;
                    out = run_pipeline(view, data, dc, sub_seed, cfg.delta);
                }
                const auto t1 = std::chrono::steady_clock::now();

                ExperimentRecord rec;
                rec.seed = seed;
                rec.num_trajectories = K;
                rec.rho = ctx.instance.rho;
                rec.solver = cfg.solver;
                rec.subopt = suboptimality(ctx.instance, ctx.solution, out.policy);
                rec.gamma_used = out.gamma;
                rec.runtime_ms =
                    std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
                rec.n_post_subsample = out.n_samples;
                records.push_back(rec);
            }
        }
    }
    return records;
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
    std::ostringstream out;
    out << "seed,K,rho,solver,subopt,gamma_used,runtime_ms,n_post\n";
    for (const auto& r : records) {
        out << r.seed << ',' << r.num_trajectories << ',' << format_double(r.rho) << ','
            << to_string(r.solver) << ',' << format_double(r.subopt) << ','
            << format_double(r.gamma_used) << ',' << r.runtime_ms << ',' << r.n_post_subsample
            << '\n';
    }
    return out.str();
}

std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "seed,K,rho,solver,subopt,gamma_used,runtime_ms,n_post")
        throw ValidationError("CSV: missing or unexpected header");
    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 8) throw ValidationError("CSV: expected 8 fields per row");
        ExperimentRecord r;
        r.seed = parse_u64(fields[0]);
        r.num_trajectories = static_cast<int>(parse_ll(fields[1]));
        r.rho = parse_double(fields[2]);
        r.solver = solver_kind_from_string(fields[3]);
        r.subopt = parse_double(fields[4]);
        r.gamma_used = parse_double(fields[5]);
        r.runtime_ms = parse_ll(fields[6]);
        r.n_post_subsample = parse_ll(fields[7]);
        records.push_back(r);
    }
    return records;
}

void save_records_csv(const std::vector<ExperimentRecord>& records, const std::string& path) {
    write_file(path, records_to_csv(records));
}

std::vector<ExperimentRecord> load_records_csv(const std::string& path) {
    return records_from_csv(read_file(path));
}

double sweep_slope(const std::vector<ExperimentRecord>& records) {
    std::map<int, std::vector<double>> by_k;
    for (const auto& r : records) by_k[r.num_trajectories].push_back(r.subopt);
    if (by_k.size() < 3)
        throw std::invalid_argument("sweep_slope: need at least 3 distinct K values");
    for (const auto& [k, xs] : by_k)
        if (xs.size() < 10)
            throw std::invalid_argument("sweep_slope: need at least 10 records per K (K=" +
                                        std::to_string(k) + ")");

    std::vector<double> x, y;
    for (const auto& [k, xs] : by_k) {
        const double med = median(xs);
        if (med <= 0.0)
            throw std::invalid_argument("sweep_slope: median sub-optimality must be positive");
        x.push_back(std::log(static_cast<double>(k)));
        y.push_back(std::log(med));
    }
    const std::size_t n = x.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (x[i] - mean_x) * (y[i] - mean_y);
        var += (x[i] - mean_x) * (x[i] - mean_x);
    }
    return cov / var;
}

DiagnosticsReport diagnose(const LinRmdpInstance& instance, const StochasticPolicy& behavior) {
    const RobustSolution sol = robust_value_iteration(instance);
    std::vector<Kernel> kernels;
    kernels.push_back(nominal_kernel(instance));
    kernels.push_back(worst_case_kernel(instance, sol.v_star));

    DiagnosticsReport report;
    report.kappa = kappa(instance, behavior);
    report.c_rob_lower_bound =
        clipped_concentrability(instance, behavior, sol.pi_star, kernels);
    report.c1_lower_bound = unclipped_concentrability(instance, behavior, sol.pi_star, kernels);
    if (!(report.c_rob_lower_bound <=
          instance.dim * report.c1_lower_bound * (1.0 + 1e-9) + 1e-9))
        throw std::logic_error("diagnose: clipped coefficient exceeds d times the unclipped one");
    return report;
}

std::string diagnostics_to_json(const DiagnosticsReport& report) {
    json doc;
    doc["kappa"] = report.kappa;
    doc["C_rob_lower_bound"] = report.c_rob_lower_bound;
    doc["C1_lower_bound"] = report.c1_lower_bound;
    return doc.dump(2) + "\n";
}

namespace {

std::string format_fixed(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", x);
    return buf;
}

constexpr const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

} // namespace

void plot_csv(const std::string& csv_path, const std::string& out_path) {
    const std::vector<ExperimentRecord> records = load_records_csv(csv_path);
    if (records.empty()) throw ValidationError("plot: CSV has no data rows");

    // one series per solver: K -> median subopt
    std::map<std::string, std::map<int, std::vector<double>>> grouped;
    for (const auto& r : records)
        grouped[to_string(r.solver)][r.num_trajectories].push_back(r.subopt);

    struct Series {
        std::string name;
        std::vector<std::pair<double, double>> pts; // (log10 K, log10 median)
    };
    std::vector<Series> series;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& [name, by_k] : grouped) {
        Series s;
        s.name = name;
        for (const auto& [k, xs] : by_k) {
            const double med = std::max(median(xs), 1e-12);
            const double px = std::log10(static_cast<double>(k));
            const double py = std::log10(med);
            s.pts.emplace_back(px, py);
            x_min = std::min(x_min, px);
            x_max = std::max(x_max, px);
            y_min = std::min(y_min, py);
            y_max = std::max(y_max, py);
        }
        series.push_back(std::move(s));
    }
    if (x_max - x_min < 1e-9) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max - y_min < 1e-9) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad_x = 0.06 * (x_max - x_min);
    const double pad_y = 0.08 * (y_max - y_min);
    x_min -= pad_x;
    x_max += pad_x;
    y_min -= pad_y;
    y_max += pad_y;

    constexpr double W = 640, H = 480, ML = 70, MR = 20, MT = 20, MB = 50;
    const auto to_px = [&](double x) { return ML + (x - x_min) / (x_max - x_min) * (W - ML - MR); };
    const auto to_py = [&](double y) { return H - MB - (y - y_min) / (y_max - y_min) * (H - MT - MB); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
           "viewBox=\"0 0 640 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << format_fixed(ML) << "\" y1=\"" << format_fixed(H - MB) << "\" x2=\""
        << format_fixed(W - MR) << "\" y2=\"" << format_fixed(H - MB)
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << format_fixed(ML) << "\" y1=\"" << format_fixed(MT) << "\" x2=\""
        << format_fixed(ML) << "\" y2=\"" << format_fixed(H - MB) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << format_fixed((ML + W - MR) / 2) << "\" y=\"" << format_fixed(H - 12)
        << "\" text-anchor=\"middle\">K (log scale)</text>\n";
    svg << "<text x=\"16\" y=\"" << format_fixed((MT + H - MB) / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << format_fixed((MT + H - MB) / 2) << ")\">median sub-optimality (log scale)</text>\n";

    // ticks: every distinct K on x, 4 even ticks on y
    std::map<int, bool> distinct_k;
    for (const auto& r : records) distinct_k[r.num_trajectories] = true;
    for (const auto& [k, unused] : distinct_k) {
        (void)unused;
        const double px = to_px(std::log10(static_cast<double>(k)));
        svg << "<line x1=\"" << format_fixed(px) << "\" y1=\"" << format_fixed(H - MB)
            << "\" x2=\"" << format_fixed(px) << "\" y2=\"" << format_fixed(H - MB + 5)
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << format_fixed(px) << "\" y=\"" << format_fixed(H - MB + 18)
            << "\" text-anchor=\"middle\">" << k << "</text>\n";
    }
    for (int t = 0; t <= 3; ++t) {
        const double vy = y_min + (y_max - y_min) * t / 3.0;
        const double py = to_py(vy);
        char label[32];
        std::snprintf(label, sizeof(label), "%.3g", std::pow(10.0, vy));
        svg << "<line x1=\"" << format_fixed(ML - 5) << "\" y1=\"" << format_fixed(py)
            << "\" x2=\"" << format_fixed(ML) << "\" y2=\"" << format_fixed(py)
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << format_fixed(ML - 8) << "\" y=\"" << format_fixed(py + 4)
            << "\" text-anchor=\"end\">" << label << "</text>\n";
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kSeriesColors[si % 4];
        std::sort(series[si].pts.begin(), series[si].pts.end());
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[si].pts)
            svg << format_fixed(to_px(x)) << ',' << format_fixed(to_py(y)) << ' ';
        svg << "\"/>\n";
        for (const auto& [x, y] : series[si].pts)
            svg << "<circle cx=\"" << format_fixed(to_px(x)) << "\" cy=\""
                << format_fixed(to_py(y)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        svg << "<text x=\"" << format_fixed(W - MR - 100) << "\" y=\""
            << format_fixed(MT + 16 + 16 * static_cast<double>(si)) << "\" fill=\"" << color
            << "\">" << series[si].name << "</text>\n";
    }
    svg << "</svg>\n";
    write_file(out_path, svg.str());
}

} // namespace linrmdp
