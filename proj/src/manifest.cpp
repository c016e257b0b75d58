#include "semiope/manifest.hpp"

#include "json.hpp"
#include "semiope/serialization.hpp"

namespace semiope {

uint64_t content_hash(std::string_view content) { return fnv1a64(content); }

uint64_t mdp_fingerprint(const TabularMDP& mdp) { return content_hash(mdp_to_json(mdp)); }

void RunManifest::add_output(const std::string& path, std::string_view content) {
    outputs.push_back({path, content_hash(content), content.size()});
}

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["tool_version"] = tool_version;
    j["master_seed"] = master_seed;
    if (config_echo.empty())
        j["config"] = nullptr;
    else
        j["config"] = nlohmann::ordered_json::parse(config_echo);
    j["environment_fingerprint"] = environment_fingerprint;
    auto files = nlohmann::ordered_json::array();
    for (const OutputFile& f : outputs)
        files.push_back({{"path", f.path}, {"hash", f.hash}, {"bytes", f.bytes}});
    j["outputs"] = std::move(files);
    auto times = nlohmann::ordered_json::array();
    for (const Timing& t : timings)
        times.push_back({{"label", t.label}, {"seconds", t.seconds}});
    j["timings"] = std::move(times);
    return j.dump(2);
}

}  // namespace semiope
