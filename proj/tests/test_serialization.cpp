#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "json.hpp"
#include "semiope/environments.hpp"
#include "semiope/estimators.hpp"
#include "semiope/manifest.hpp"
#include "semiope/sepsis.hpp"
#include "semiope/serialization.hpp"

using namespace semiope;

namespace {

TabularMDP fixture_mdp() {
    std::vector<double> leaves = {1.0, 3.0, 0.0, 2.0};
    TabularMDP mdp = make_tree_mdp(2, 2, leaves);
    mdp.discount = 0.9;
    return mdp;
}

}  // namespace

TEST_CASE("mdp json round trip is byte identical") {
    TabularMDP mdp = fixture_mdp();
    std::string once = mdp_to_json(mdp);
    TabularMDP back = mdp_from_json(once);
    std::string twice = mdp_to_json(back);
    CHECK(once == twice);
    CHECK(back.num_states == mdp.num_states);
    CHECK(back.discount == mdp.discount);
    CHECK(back.transition == mdp.transition);
    CHECK(back.reward_mean == mdp.reward_mean);
    CHECK(back.terminal == mdp.terminal);
    CHECK(mdp_fingerprint(back) == mdp_fingerprint(mdp));

    auto doc = nlohmann::json::parse(once);
    CHECK(doc["format_version"] == 1);
}

TEST_CASE("entry reward flags survive the round trip") {
    SepsisConfig cfg;
    TabularMDP mdp = make_sepsis_mdp(cfg);
    TabularMDP back = mdp_from_json(mdp_to_json(mdp));
    CHECK(back.reward_on_entry);
    CHECK(back.entry_reward == mdp.entry_reward);
    back.validate();
}

TEST_CASE("policy json round trip") {
    Policy pi(2, 3);
    pi.at(0, 2) = 1.0;
    pi.at(1, 0) = 0.25;
    pi.at(1, 2) = 0.75;
    std::string once = policy_to_json(pi);
    Policy back = policy_from_json(once);
    CHECK(policy_to_json(back) == once);
    CHECK(back.probs == pi.probs);

    auto doc = nlohmann::json::parse(once);
    doc["format_version"] = 99;
    CHECK_THROWS_AS(policy_from_json(doc.dump()), IoError);
}

TEST_CASE("dataset jsonl round trip") {
    TabularMDP mdp = fixture_mdp();
    Policy pi(mdp.num_states, 2);
    for (int s = 0; s < mdp.num_states; ++s) {
        pi.at(s, 0) = 0.5;
        pi.at(s, 1) = 0.5;
    }
    Dataset data;
    for (int i = 0; i < 25; ++i) {
        RngStream rng = RngStream::derive(71, "ep", {uint64_t(i)});
        data.push_back(sample_trajectory(mdp, pi, rng));
    }
    std::string once = dataset_to_jsonl(data);
    Dataset back = dataset_from_jsonl(once);
    REQUIRE(back.size() == data.size());
    CHECK(dataset_to_jsonl(back) == once);
    for (size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].final_state == data[i].final_state);
        REQUIRE(back[i].steps.size() == data[i].steps.size());
        for (size_t t = 0; t < data[i].steps.size(); ++t) {
            CHECK(back[i].steps[t].state == data[i].steps[t].state);
            CHECK(back[i].steps[t].action == data[i].steps[t].action);
            CHECK(back[i].steps[t].reward == data[i].steps[t].reward);
        }
    }
}

TEST_CASE("annotated jsonl round trip") {
    TabularMDP mdp = fixture_mdp();
    Policy pi(mdp.num_states, 2);
    for (int s = 0; s < mdp.num_states; ++s) {
        pi.at(s, 0) = 0.5;
        pi.at(s, 1) = 0.5;
    }
    Dataset data;
    for (int i = 0; i < 25; ++i) {
        RngStream rng = RngStream::derive(72, "ep", {uint64_t(i)});
        data.push_back(sample_trajectory(mdp, pi, rng));
    }
    AnnotationSpec spec;
    spec.source = AnnotationSource::q_eval;
    spec.noise_std = 0.2;
    spec.availability_fraction = 0.6;
    AnnotatedDataset ann = annotate(data, mdp, &pi, &pi, spec);
    std::string once = annotated_to_jsonl(ann);
    AnnotatedDataset back = annotated_from_jsonl(once);
    REQUIRE(back.size() == ann.size());
    CHECK(annotated_to_jsonl(back) == once);
    for (size_t i = 0; i < ann.size(); ++i)
        for (size_t t = 0; t < ann[i].annotations.size(); ++t) {
            CHECK(back[i].annotations[t].available == ann[i].annotations[t].available);
            for (int a = 0; a < 2; ++a)
                if (ann[i].annotations[t].available[a])
                    CHECK(back[i].annotations[t].value[a] == ann[i].annotations[t].value[a]);
        }
}

TEST_CASE("estimate report json") {
    EstimateReport rep;
    rep.estimator_id = "pdis";
    rep.value = 1.5;
    rep.ess = 12.25;
    rep.n = 20;
    rep.per_trajectory_estimates = {1.0, 2.0};
    rep.per_trajectory_weights = {0.5, 1.5};
    auto doc = nlohmann::json::parse(estimate_report_to_json(rep));
    CHECK(doc["format_version"] == 1);
    CHECK(doc["estimator"] == "pdis");
    CHECK(doc["value"] == 1.5);
    CHECK(doc["ess"] == 12.25);
    CHECK(doc["n"] == 20);
    CHECK(doc["per_trajectory_estimates"].size() == 2);

    auto lean = nlohmann::json::parse(estimate_report_to_json(rep, false));
    CHECK_FALSE(lean.contains("per_trajectory_estimates"));
}

TEST_CASE("content hashes and manifests") {
    CHECK(content_hash("") == 1469598103934665603ULL);
    CHECK(content_hash("a") != content_hash("b"));

    RunManifest man;
    man.master_seed = 42;
    man.config_echo = "{\"experiment\":\"bandit_table\"}";
    man.environment_fingerprint = 7;
    man.add_output("table.csv", "col\n1\n");
    man.timings.push_back({"run", 0.5});
    auto doc = nlohmann::json::parse(man.to_json());
    CHECK(doc["format_version"] == 1);
    CHECK(doc["master_seed"] == 42);
    CHECK(doc["config"]["experiment"] == "bandit_table");
    REQUIRE(doc["outputs"].size() == 1);
    CHECK(doc["outputs"][0]["path"] == "table.csv");
    CHECK(doc["outputs"][0]["hash"] == content_hash("col\n1\n"));
    CHECK(doc["outputs"][0]["bytes"] == 6);
}

TEST_CASE("file io") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "semiope_serialization_test";
    fs::create_directories(dir);
    std::string path = (dir / "blob.txt").string();
    write_file(path, "hello\n");
    CHECK(read_file(path) == "hello\n");
    CHECK_THROWS_AS(read_file((dir / "missing.txt").string()), IoError);
    fs::remove_all(dir);
}
