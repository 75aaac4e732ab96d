// acceptance.hpp -- the end-to-end verification suite; one entry per
// criterion, each with its tolerance pinned in code.
#pragma once

#include <string>
#include <vector>

namespace bkt::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    bool quick = false;   // reduced MC sample counts (smoke runs)
    std::string cache_dir = "cache";
};

std::vector<CriterionResult> run_all(const Options& opt = {});

// one pass/fail line per criterion
void print_results(const std::vector<CriterionResult>& results);
bool all_pass(const std::vector<CriterionResult>& results);
std::string to_json(const std::vector<CriterionResult>& results);

}  // namespace bkt::acceptance
