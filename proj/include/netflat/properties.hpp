#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "netflat/graph.hpp"

namespace netflat {

struct FamilyResult {
    std::string name;
    bool pass = true;
    int cases = 0;
    double max_defect = 0.0;
    std::string note;
};

struct PropertyReport {
    uint64_t seed = 0;
    std::vector<FamilyResult> families;

    bool all_pass() const;
    nlohmann::json to_json() const;
};

struct FaultInjection {
    bool weight_sign = false;  // flips one edge weight in a fixture
};

// Seeded invariant families over the fixture graphs; failures are report
// content, not exceptions.
PropertyReport run_property_suite(uint64_t seed, const FaultInjection& fault = {});

// Frozen 10-vertex weighted fixture used across the test suites.
std::shared_ptr<const GraphModel> fixture_graph_10();

}  // namespace netflat
