#ifndef HQ_TEST_FIXTURES_HPP
#define HQ_TEST_FIXTURES_HPP

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hq/callgraph.hpp"
#include "hq/logic_group.hpp"

#ifndef HQ_FIXTURES_DIR
#error "HQ_FIXTURES_DIR must point at the test fixture directory"
#endif

namespace fixtures {

inline std::string path(const std::string& name) {
    return std::string(HQ_FIXTURES_DIR) + "/" + name;
}

inline nlohmann::json load_json(const std::string& name) {
    std::ifstream in(path(name));
    if (!in) throw std::runtime_error("missing fixture: " + name);
    return nlohmann::json::parse(in);
}

inline hq::CallGraph load_graph(const std::string& name) {
    return hq::CallGraph::from_json(load_json(name));
}

inline std::vector<hq::LogicGroup> load_lgs(const std::string& name) {
    std::vector<hq::LogicGroup> lgs;
    for (const auto& doc : load_json(name)) lgs.push_back(hq::lg_from_json(doc));
    return lgs;
}

}  // namespace fixtures

#endif
