#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semiope/mdp.hpp"

namespace semiope {

uint64_t content_hash(std::string_view content);  // FNV-1a 64-bit

uint64_t mdp_fingerprint(const TabularMDP& mdp);

struct RunManifest {
    std::string tool_version = "1.0.0";
    uint64_t master_seed = 0;
    std::string config_echo;  // JSON text, empty if none
    uint64_t environment_fingerprint = 0;

    struct OutputFile {
        std::string path;
        uint64_t hash = 0;
        size_t bytes = 0;
    };
    std::vector<OutputFile> outputs;

    struct Timing {
        std::string label;
        double seconds = 0.0;
    };
    std::vector<Timing> timings;

    void add_output(const std::string& path, std::string_view content);
    std::string to_json() const;
};

}  // namespace semiope
