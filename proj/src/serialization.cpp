#include "semiope/serialization.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace semiope {

namespace {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

void check_version(const json& j, const char* what) {
    if (!j.contains("format_version") || j["format_version"].get<int>() != kFormatVersion)
        throw IoError(std::string(what) + ": unsupported or missing format_version");
}

json trajectory_to_json(const Trajectory& traj) {
    json steps = json::array();
    for (const Step& st : traj.steps) steps.push_back({st.state, st.action, st.reward});
    return json{{"steps", std::move(steps)}, {"final_state", traj.final_state}};
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory traj;
    for (const auto& s : j.at("steps"))
        traj.steps.push_back({s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<double>()});
    traj.final_state = j.at("final_state").get<int>();
    return traj;
}

}  // namespace

std::string mdp_to_json(const TabularMDP& mdp) {
    json j;
    j["format_version"] = kFormatVersion;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["horizon"] = mdp.horizon;
    j["discount"] = mdp.discount;
    j["transition"] = mdp.transition;
    j["reward_mean"] = mdp.reward_mean;
    j["reward_std"] = mdp.reward_std;
    j["initial_dist"] = mdp.initial_dist;
    j["terminal"] = mdp.terminal;
    j["reward_on_entry"] = mdp.reward_on_entry;
    j["entry_reward"] = mdp.entry_reward;
    return j.dump();
}

TabularMDP mdp_from_json(const std::string& text) {
    json j = json::parse(text);
    check_version(j, "mdp");
    TabularMDP mdp;
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.horizon = j.at("horizon").get<int>();
    mdp.discount = j.at("discount").get<double>();
    mdp.transition = j.at("transition").get<std::vector<double>>();
    mdp.reward_mean = j.at("reward_mean").get<std::vector<double>>();
    mdp.reward_std = j.at("reward_std").get<std::vector<double>>();
    mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
    mdp.terminal = j.at("terminal").get<std::vector<uint8_t>>();
    mdp.reward_on_entry = j.at("reward_on_entry").get<bool>();
    mdp.entry_reward = j.at("entry_reward").get<std::vector<double>>();
    mdp.validate();
    return mdp;
}

std::string policy_to_json(const Policy& policy) {
    json j;
    j["format_version"] = kFormatVersion;
    j["num_states"] = policy.num_states;
    j["num_actions"] = policy.num_actions;
    j["probs"] = policy.probs;
    return j.dump();
}

Policy policy_from_json(const std::string& text) {
    json j = json::parse(text);
    check_version(j, "policy");
    Policy p(j.at("num_states").get<int>(), j.at("num_actions").get<int>());
    p.probs = j.at("probs").get<std::vector<double>>();
    p.validate();
    return p;
}

std::string dataset_to_jsonl(const Dataset& data) {
    std::string out;
    for (const Trajectory& traj : data) {
        json j = trajectory_to_json(traj);
        j["format_version"] = kFormatVersion;
        out += j.dump();
        out += '\n';
    }
    return out;
}

Dataset dataset_from_jsonl(const std::string& text) {
    Dataset data;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        check_version(j, "trajectory");
        data.push_back(trajectory_from_json(j));
    }
    return data;
}

std::string annotated_to_jsonl(const AnnotatedDataset& data) {
    std::string out;
    for (const AnnotatedTrajectory& traj : data) {
        json j = trajectory_to_json(traj.base);
        j["format_version"] = kFormatVersion;
        json anns = json::array();
        for (const StepAnnotations& ann : traj.annotations) {
            json step = json::array();
            for (size_t a = 0; a < ann.available.size(); ++a)
                if (ann.available[a]) step.push_back({int(a), ann.value[a]});
            anns.push_back(std::move(step));
        }
        j["num_actions"] = traj.annotations.empty() ? 0 : int(traj.annotations[0].available.size());
        j["annotations"] = std::move(anns);
        out += j.dump();
        out += '\n';
    }
    return out;
}

AnnotatedDataset annotated_from_jsonl(const std::string& text) {
    AnnotatedDataset data;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        check_version(j, "annotated trajectory");
        AnnotatedTrajectory traj;
        traj.base = trajectory_from_json(j);
        int A = j.at("num_actions").get<int>();
        const json& anns = j.at("annotations");
        traj.annotations.resize(traj.base.steps.size());
        if (anns.size() != traj.base.steps.size())
            throw IoError("annotation record count does not match steps");
        for (size_t t = 0; t < traj.annotations.size(); ++t) {
            StepAnnotations& ann = traj.annotations[t];
            ann.available.assign(A, 0);
            ann.value.assign(A, 0.0);
            for (const auto& pair : anns[t]) {
                int a = pair.at(0).get<int>();
                ann.available[a] = 1;
                ann.value[a] = pair.at(1).get<double>();
            }
        }
        data.push_back(std::move(traj));
    }
    return data;
}

std::string estimate_report_to_json(const EstimateReport& rep, bool include_per_trajectory) {
    json j;
    j["format_version"] = kFormatVersion;
    j["estimator"] = rep.estimator_id;
    j["value"] = rep.value;
    j["ess"] = rep.ess;
    j["n"] = rep.n;
    if (include_per_trajectory) {
        j["per_trajectory_estimates"] = rep.per_trajectory_estimates;
        j["per_trajectory_weights"] = rep.per_trajectory_weights;
    }
    return j.dump(2);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace semiope
