#include "linrmdp/serialization.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace linrmdp {

using nlohmann::json;

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json vector_as_nested(const std::vector<double>& flat, std::span<const int> dims, std::size_t& pos) {
    if (dims.size() == 1) {
        json arr = json::array();
        for (int i = 0; i < dims[0]; ++i) arr.push_back(flat[pos++]);
        return arr;
    }
    json arr = json::array();
    for (int i = 0; i < dims[0]; ++i) arr.push_back(vector_as_nested(flat, dims.subspan(1), pos));
    return arr;
}

json nested(const std::vector<double>& flat, std::initializer_list<int> dims) {
    std::vector<int> d(dims);
    std::size_t pos = 0;
    json out = vector_as_nested(flat, d, pos);
    if (pos != flat.size()) throw std::logic_error("nested: dimension mismatch");
    return out;
}

void flatten_into(const json& arr, std::span<const int> dims, std::vector<double>& out,
                  const char* what) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != dims[0])
        throw ValidationError(std::string("instance JSON: bad shape for ") + what);
    if (dims.size() == 1) {
        for (const auto& x : arr) {
            if (!x.is_number()) throw ValidationError(std::string("instance JSON: non-numeric entry in ") + what);
            out.push_back(x.get<double>());
        }
        return;
    }
    for (const auto& sub : arr) flatten_into(sub, dims.subspan(1), out, what);
}

std::vector<double> flatten(const json& arr, std::initializer_list<int> dims, const char* what) {
    std::vector<int> d(dims);
    std::vector<double> out;
    flatten_into(arr, d, out, what);
    return out;
}

} // namespace

std::string instance_to_json(const LinRmdpInstance& inst) {
    json doc;
    doc["S"] = inst.num_states;
    doc["A"] = inst.num_actions;
    doc["H"] = inst.horizon;
    doc["d"] = inst.dim;
    doc["rho"] = inst.rho;
    doc["zeta"] = nested(inst.initial_dist, {inst.num_states});
    doc["phi"] = nested(inst.phi, {inst.num_states, inst.num_actions, inst.dim});
    doc["theta"] = nested(inst.theta, {inst.horizon, inst.dim});
    doc["mu0"] = nested(inst.mu0, {inst.horizon, inst.dim, inst.num_states});
    return doc.dump(2) + "\n";
}

LinRmdpInstance instance_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("instance JSON parse error: ") + e.what());
    }
    for (const char* key : {"S", "A", "H", "d", "rho", "zeta", "phi", "theta", "mu0"})
        if (!doc.contains(key))
            throw ValidationError(std::string("instance JSON missing key: ") + key);

    LinRmdpInstance inst;
    inst.num_states = doc["S"].get<int>();
    inst.num_actions = doc["A"].get<int>();
    inst.horizon = doc["H"].get<int>();
    inst.dim = doc["d"].get<int>();
    inst.rho = doc["rho"].get<double>();
    if (inst.num_states <= 0 || inst.num_actions <= 0 || inst.horizon <= 0 || inst.dim <= 0)
        throw ValidationError("instance JSON: dimensions must be positive");
    inst.initial_dist = flatten(doc["zeta"], {inst.num_states}, "zeta");
    inst.phi = flatten(doc["phi"], {inst.num_states, inst.num_actions, inst.dim}, "phi");
    inst.theta = flatten(doc["theta"], {inst.horizon, inst.dim}, "theta");
    inst.mu0 = flatten(doc["mu0"], {inst.horizon, inst.dim, inst.num_states}, "mu0");
    require_valid(inst);
    return inst;
}

void save_instance(const LinRmdpInstance& inst, const std::string& path) {
    write_file(path, instance_to_json(inst));
}

LinRmdpInstance load_instance(const std::string& path) {
    return instance_from_json(read_file(path));
}

void save_dataset(const OfflineDataset& data, const std::string& path) {
    std::ostringstream out;
    for (std::size_t h = 0; h < data.steps.size(); ++h)
        for (const auto& t : data.steps[h]) {
            json line;
            line["h"] = static_cast<int>(h);
            line["s"] = t.state;
            line["a"] = t.action;
            line["r"] = t.reward;
            line["s_next"] = t.next_state;
            line["traj"] = t.traj;
            out << line.dump() << "\n";
        }
    write_file(path, out.str());
}

OfflineDataset load_dataset(const std::string& path, int num_states, int num_actions,
                            int horizon) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open for reading: " + path);

    OfflineDataset data;
    data.horizon = horizon;
    data.steps.assign(static_cast<std::size_t>(horizon), {});
    int max_traj = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
        for (const char* key : {"h", "s", "a", "r", "s_next", "traj"})
            if (!rec.contains(key))
                throw ValidationError("dataset line " + std::to_string(line_no) +
                                      " missing key: " + key);
        const int h = rec["h"].get<int>();
        Transition t;
        t.state = rec["s"].get<int>();
        t.action = rec["a"].get<int>();
        t.reward = rec["r"].get<double>();
        t.next_state = rec["s_next"].get<int>();
        t.traj = rec["traj"].get<int>();
        if (h < 0 || h >= horizon || t.state < 0 || t.state >= num_states || t.action < 0 ||
            t.action >= num_actions || t.next_state < 0 || t.next_state >= num_states ||
            t.traj < 0)
            throw ValidationError("dataset line " + std::to_string(line_no) +
                                  ": index out of range");
        if (t.reward < 0.0 || t.reward > 1.0)
            throw ValidationError("dataset line " + std::to_string(line_no) +
                                  ": reward outside [0,1]");
        max_traj = std::max(max_traj, t.traj);
        data.steps[static_cast<std::size_t>(h)].push_back(t);
    }
    data.num_trajectories = max_traj + 1;
    return data;
}

std::string solver_output_to_json(const SolverOutput& out) {
    json doc;
    doc["Q"] = nested(out.q, {out.horizon, out.num_states, out.num_actions});
    doc["V"] = nested(out.v.values, {out.horizon + 1, out.num_states});
    json pi = json::array();
    for (int h = 0; h < out.horizon; ++h) {
        json row = json::array();
        for (int s = 0; s < out.num_states; ++s) row.push_back(out.policy.at(h, s));
        pi.push_back(row);
    }
    doc["pi"] = pi;
    doc["gamma0"] = out.gamma;
    doc["lambda0"] = out.lambda;
    json steps = json::array();
    for (const auto& st : out.steps) {
        json s;
        s["penalty_min"] = st.penalty_min;
        s["penalty_max"] = st.penalty_max;
        s["sigma2_min"] = st.sigma2_min;
        s["sigma2_max"] = st.sigma2_max;
        steps.push_back(s);
    }
    doc["per_step"] = steps;
    return doc.dump(2) + "\n";
}

void save_solver_output(const SolverOutput& output, const std::string& path) {
    write_file(path, solver_output_to_json(output));
}

std::string robust_solution_to_json(const RobustSolution& sol, double rho, int num_states,
                                    int num_actions) {
    const int horizon = sol.v_star.horizon;
    json doc;
    doc["V_star"] = nested(sol.v_star.values, {horizon + 1, num_states});
    doc["Q_star"] = nested(sol.q_star, {horizon, num_states, num_actions});
    json pi = json::array();
    for (int h = 0; h < horizon; ++h) {
        json row = json::array();
        for (int s = 0; s < num_states; ++s) row.push_back(sol.pi_star.at(h, s));
        pi.push_back(row);
    }
    doc["pi_star"] = pi;
    doc["rho"] = rho;
    return doc.dump(2) + "\n";
}

void save_robust_solution(const RobustSolution& sol, double rho, int num_states, int num_actions,
                          const std::string& path) {
    write_file(path, robust_solution_to_json(sol, rho, num_states, num_actions));
}

} // namespace linrmdp
