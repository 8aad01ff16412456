#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "keynet/topology.hpp"

namespace keynet::testing {

inline std::filesystem::path fixture_dir() { return KEYNET_FIXTURE_DIR; }
inline std::filesystem::path golden_dir() { return KEYNET_GOLDEN_DIR; }

inline std::string fixture(const std::string& relative) { return (fixture_dir() / relative).string(); }

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline NetworkTopology load_topology(const std::string& name) {
    return parse_topology(slurp(fixture_dir() / "topologies" / (name + ".json")));
}

}  // namespace keynet::testing
