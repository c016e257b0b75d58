#pragma once

#include <stdexcept>
#include <string>

#include "semiope/annotation.hpp"
#include "semiope/estimators.hpp"
#include "semiope/mdp.hpp"

namespace semiope {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// all documents carry format_version; serialization is deterministic, so
// write -> read -> write round-trips byte-identically

std::string mdp_to_json(const TabularMDP& mdp);
TabularMDP mdp_from_json(const std::string& text);

std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text);

// one JSON object per line per trajectory
std::string dataset_to_jsonl(const Dataset& data);
Dataset dataset_from_jsonl(const std::string& text);

std::string annotated_to_jsonl(const AnnotatedDataset& data);
AnnotatedDataset annotated_from_jsonl(const std::string& text);

std::string estimate_report_to_json(const EstimateReport& rep,
                                    bool include_per_trajectory = true);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace semiope
