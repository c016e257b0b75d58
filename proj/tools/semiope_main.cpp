#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "semiope/experiments.hpp"
#include "semiope/manifest.hpp"
#include "semiope/serialization.hpp"

using namespace semiope;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSupport = 3;
constexpr int kExitIo = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TabularMDP make_named_env(const std::string& name) {
    if (name == "sepsis") return make_sepsis_mdp(SepsisConfig{});
    if (name == "two-state-bandit") {
        BanditSpec spec;
        spec.num_states = 2;
        spec.num_actions = 2;
        spec.reward_means = {1.0, 2.0, 1.0, 1.0};
        spec.reward_stds = {0.5, 0.5, 0.5, 0.5};
        spec.state_probs = {0.5, 0.5};
        return make_two_state_bandit(spec);
    }
    if (name == "one-state-bandit") return make_one_state_bandit(1.0, 2.0, 1.0, 1.0);
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
        return mdp_from_json(read_file(name));
    throw ConfigError("unknown environment: " + name);
}

Policy load_policy(const std::string& path) { return policy_from_json(read_file(path)); }

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty() || dir == ".") return file;
    return dir + "/" + file;
}

AnnotationSource parse_source(const std::string& s) {
    if (s == "q-eval") return AnnotationSource::q_eval;
    if (s == "q-behavior") return AnnotationSource::q_behavior;
    if (s == "reward-mean") return AnnotationSource::reward_mean;
    throw ConfigError("unknown annotation source: " + s);
}

int run_gen_data(const std::string& env_name, int datasets, int episodes, double behavior_eps,
                 uint64_t seed, const std::string& out_dir) {
    TabularMDP mdp = make_named_env(env_name);
    Policy pi_b = eps_greedy(optimal_policy(mdp), behavior_eps);
    std::vector<Dataset> data = generate_datasets(mdp, pi_b, datasets, episodes, seed);

    RunManifest man;
    man.master_seed = seed;
    man.environment_fingerprint = mdp_fingerprint(mdp);
    ordered_json cfg{{"command", "gen-data"}, {"env", env_name},      {"datasets", datasets},
                     {"episodes", episodes}, {"behavior_eps", behavior_eps}};
    man.config_echo = cfg.dump();

    std::string env_json = mdp_to_json(mdp);
    write_file(join_path(out_dir, "env.json"), env_json);
    man.add_output("env.json", env_json);
    std::string pol_json = policy_to_json(pi_b);
    write_file(join_path(out_dir, "behavior_policy.json"), pol_json);
    man.add_output("behavior_policy.json", pol_json);
    for (int d = 0; d < datasets; ++d) {
        std::string name = "dataset_" + std::to_string(d) + ".jsonl";
        std::string body = dataset_to_jsonl(data[d]);
        write_file(join_path(out_dir, name), body);
        man.add_output(name, body);
    }
    write_file(join_path(out_dir, "manifest.json"), man.to_json());
    return 0;
}

int run_annotate(const std::string& data_path, const std::string& env_name,
                 const std::string& source, double noise, double availability,
                 const std::string& eval_policy_path, const std::string& behavior_policy_path,
                 bool impute, bool bias_correct, uint64_t seed, const std::string& out_path) {
    TabularMDP mdp = make_named_env(env_name);
    Dataset data = dataset_from_jsonl(read_file(data_path));

    AnnotationSpec spec;
    spec.source = parse_source(source);
    spec.noise_std = noise;
    spec.availability_fraction = availability;
    spec.seed = seed;

    Policy pi_e, pi_b;
    bool have_e = !eval_policy_path.empty(), have_b = !behavior_policy_path.empty();
    if (have_e) pi_e = load_policy(eval_policy_path);
    if (have_b) pi_b = load_policy(behavior_policy_path);
    if (spec.source == AnnotationSource::q_eval && !have_e)
        throw ConfigError("--source q-eval requires --eval-policy");
    if (spec.source == AnnotationSource::q_behavior && !have_b)
        throw ConfigError("--source q-behavior requires --behavior-policy");

    AnnotatedDataset ann = annotate(data, mdp, have_e ? &pi_e : nullptr,
                                    have_b ? &pi_b : nullptr, spec);
    if (bias_correct) {
        if (!have_e || !have_b)
            throw ConfigError("--bias-correct requires --eval-policy and --behavior-policy");
        ann = correct_bias(ann, fit_approximate_mdp(data, mdp), pi_b, pi_e);
    }
    if (impute) ann = impute_missing(ann);
    write_file(out_path, annotated_to_jsonl(ann));
    return 0;
}

int run_evaluate(const std::string& data_path, const std::string& env_name,
                 const std::string& estimator, const std::string& eval_policy_path,
                 const std::string& behavior_policy_path, bool full) {
    TabularMDP mdp = make_named_env(env_name);
    Policy pi_e = load_policy(eval_policy_path);
    std::string body = read_file(data_path);
    AnnotatedDataset ann = annotated_from_jsonl(body);
    Dataset plain;
    for (const auto& traj : ann) plain.push_back(traj.base);

    Policy pi_b;
    bool needs_b = estimator != "cstar-is" && estimator != "cstar-pdis";
    if (needs_b) {
        if (behavior_policy_path.empty())
            throw ConfigError("--estimator " + estimator + " requires --behavior-policy");
        pi_b = load_policy(behavior_policy_path);
    }

    auto weighted = [&]() {
        WeightScheme scheme;  // equal split over available annotations
        return assign_weights(ann, scheme);
    };
    auto augmented = [&](const WeightedDataset& wd) {
        return augmented_policy(average_weights(wd, mdp.num_states, mdp.num_actions), pi_b);
    };

    EstimateReport rep;
    if (estimator == "is") rep = is_estimate(plain, pi_e, pi_b, mdp.discount);
    else if (estimator == "pdis") rep = pdis(plain, pi_e, pi_b, mdp.discount);
    else if (estimator == "pdwis") rep = pdwis(plain, pi_e, pi_b, mdp.discount);
    else if (estimator == "wis") rep = wis_from_report(is_estimate(plain, pi_e, pi_b, mdp.discount));
    else if (estimator == "cis") {
        WeightedDataset wd = weighted();
        rep = cis(wd, pi_e, augmented(wd));
    } else if (estimator == "cpdis") {
        WeightedDataset wd = weighted();
        rep = cpdis(wd, pi_e, augmented(wd), mdp.discount);
    } else if (estimator == "cstar-is") rep = cstar_is(ann, pi_e);
    else if (estimator == "cstar-pdis") rep = cstar_pdis(ann, pi_e, mdp.discount);
    else if (estimator == "naive-unweighted" || estimator == "naive-weighted") {
        WeightedDataset wd = weighted();
        Policy pbp = augmented(wd);
        rep = (estimator == "naive-unweighted")
                  ? naive_unweighted(ann, pi_e, pbp, mdp.discount)
                  : naive_weighted(ann, pi_e, pi_b, pbp, mdp.discount);
    } else throw ConfigError("unknown estimator: " + estimator);

    std::printf("%s\n", estimate_report_to_json(rep, full).c_str());
    return 0;
}

template <typename T>
void maybe_get(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

int run_experiment(const std::string& config_path, uint64_t seed, int jobs,
                   const std::string& out_dir) {
    ordered_json cfg;
    try {
        cfg = ordered_json::parse(read_file(config_path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!cfg.contains("experiment"))
        throw ConfigError("config field missing: experiment");
    std::string kind = cfg.at("experiment").get<std::string>();
    maybe_get(cfg, "seed", seed);

    RunManifest man;
    man.master_seed = seed;
    man.config_echo = cfg.dump();

    std::vector<Table> tables;
    if (kind == "bandit_table") {
        BanditTableConfig c;
        c.master_seed = seed;
        c.jobs = jobs;
        maybe_get(cfg, "n_reps", c.n_reps);
        tables.push_back(run_bandit_table(c));
    } else if (kind == "weight_heatmap") {
        WeightHeatmapConfig c;
        c.master_seed = seed;
        c.jobs = jobs;
        maybe_get(cfg, "grid_points", c.grid_points);
        maybe_get(cfg, "width_points", c.width_points);
        maybe_get(cfg, "n_reps", c.n_reps);
        WeightHeatmapResult r = run_weight_heatmap(c);
        tables.push_back(std::move(r.grid));
        tables.push_back(std::move(r.width_sweep));
    } else if (kind == "missingness_heatmap") {
        MissingnessHeatmapConfig c;
        c.master_seed = seed;
        c.jobs = jobs;
        maybe_get(cfg, "grid_points", c.grid_points);
        maybe_get(cfg, "n_reps", c.n_reps);
        maybe_get(cfg, "episodes_per_rep", c.episodes_per_rep);
        tables.push_back(run_missingness_heatmap(c));
    } else if (kind == "sepsis_suite") {
        SepsisSuiteConfig c;
        c.master_seed = seed;
        c.jobs = jobs;
        maybe_get(cfg, "n_runs", c.n_runs);
        maybe_get(cfg, "n_episodes", c.n_episodes);
        maybe_get(cfg, "flip_counts", c.flip_counts);
        maybe_get(cfg, "seeds_per_count", c.seeds_per_count);
        maybe_get(cfg, "behavior_eps", c.behavior_eps);
        maybe_get(cfg, "noise_levels", c.noise_levels);
        maybe_get(cfg, "availability_levels", c.availability_levels);
        maybe_get(cfg, "low_availability", c.low_availability);
        man.environment_fingerprint = mdp_fingerprint(make_sepsis_mdp(c.env));
        SepsisSuiteResult r = run_sepsis_suite(c);
        tables = std::move(r.tables);
    } else {
        throw ConfigError("config field experiment: unknown value " + kind);
    }

    for (const Table& t : tables) {
        std::string name = t.name + ".csv";
        std::string body = t.to_csv();
        write_file(join_path(out_dir, name), body);
        man.add_output(name, body);
    }
    write_file(join_path(out_dir, "manifest.json"), man.to_json());
    return 0;
}

int run_env_info(const std::string& env_name, double behavior_eps) {
    TabularMDP mdp = make_named_env(env_name);
    Policy opt = optimal_policy(mdp);
    Policy pi_b = eps_greedy(opt, behavior_eps);
    ordered_json j;
    j["format_version"] = 1;
    j["env"] = env_name;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["horizon"] = mdp.horizon;
    j["discount"] = mdp.discount;
    j["fingerprint"] = mdp_fingerprint(mdp);
    j["v_optimal"] = exact_policy_value(mdp, opt);
    j["v_behavior"] = exact_policy_value(mdp, pi_b);
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-offline policy evaluation toolkit"};
    app.require_subcommand(1);

    uint64_t seed = 1;
    int jobs = 0;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--jobs", jobs, "worker count (0: SEMI_OPE_JOBS or hardware)");
    app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

    auto* gen = app.add_subcommand("gen-data", "sample datasets from a behavior policy");
    std::string env_name = "sepsis";
    int datasets = 1, episodes = 1000;
    double behavior_eps = 0.1;
    gen->add_option("--env", env_name, "environment id or env.json path")->required();
    gen->add_option("--datasets", datasets, "number of datasets");
    gen->add_option("--episodes", episodes, "episodes per dataset");
    gen->add_option("--behavior-eps", behavior_eps, "epsilon of the greedy behavior policy");

    auto* ann = app.add_subcommand("annotate", "add counterfactual annotations to a dataset");
    std::string data_path, source = "q-eval", eval_policy_path, behavior_policy_path,
                out_path = "annotated.jsonl";
    double noise = 0.0, availability = 1.0;
    bool impute = false, bias_correct = false;
    ann->add_option("--data", data_path, "trajectory JSON-lines file")->required();
    ann->add_option("--env", env_name, "environment id or env.json path")->required();
    ann->add_option("--source", source, "q-eval | q-behavior | reward-mean");
    ann->add_option("--noise", noise, "annotation noise std");
    ann->add_option("--availability", availability, "annotation availability fraction");
    ann->add_option("--eval-policy", eval_policy_path, "evaluation policy JSON");
    ann->add_option("--behavior-policy", behavior_policy_path, "behavior policy JSON");
    ann->add_flag("--impute", impute, "fill missing annotations with pooled means");
    ann->add_flag("--bias-correct", bias_correct, "model-based annotation correction");
    ann->add_option("--out", out_path, "output file");

    auto* ev = app.add_subcommand("evaluate", "run one estimator on a dataset");
    std::string estimator = "pdis";
    bool full = false;
    ev->add_option("--data", data_path, "annotated JSON-lines file")->required();
    ev->add_option("--env", env_name, "environment id or env.json path")->required();
    ev->add_option("--estimator", estimator,
                   "is|pdis|pdwis|wis|cis|cpdis|cstar-is|cstar-pdis|naive-unweighted|naive-weighted");
    ev->add_option("--eval-policy", eval_policy_path, "evaluation policy JSON")->required();
    ev->add_option("--behavior-policy", behavior_policy_path, "behavior policy JSON");
    ev->add_flag("--full", full, "include per-trajectory diagnostics");

    auto* ex = app.add_subcommand("experiment", "run an experiment config");
    std::string config_path;
    ex->add_option("--config", config_path, "experiment config JSON")->required();

    auto* info = app.add_subcommand("env-info", "print exact environment facts");
    info->add_option("--env", env_name, "environment id or env.json path")->required();
    info->add_option("--behavior-eps", behavior_eps, "epsilon of the reported behavior policy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (gen->parsed())
            return run_gen_data(env_name, datasets, episodes, behavior_eps, seed, out_dir);
        if (ann->parsed())
            return run_annotate(data_path, env_name, source, noise, availability,
                                eval_policy_path, behavior_policy_path, impute, bias_correct,
                                seed, join_path(out_dir, out_path));
        if (ev->parsed())
            return run_evaluate(data_path, env_name, estimator, eval_policy_path,
                                behavior_policy_path, full);
        if (ex->parsed()) return run_experiment(config_path, seed, jobs, out_dir);
        if (info->parsed()) return run_env_info(env_name, behavior_eps);
    } catch (const SupportViolation& e) {
        std::fprintf(stderr, "support violation: %s (state=%d action=%d t=%d)\n", e.what(),
                     e.state, e.action, e.t);
        return kExitSupport;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
