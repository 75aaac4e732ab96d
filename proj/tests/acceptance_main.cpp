// Runs every acceptance criterion at its pinned tolerance and prints one
// pass/fail line per criterion.
#include <cstdio>
#include <cstring>

#include "bktflow/acceptance.hpp"

int main(int argc, char** argv) {
    bkt::acceptance::Options opt;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--quick") == 0) opt.quick = true;
    const auto results = bkt::acceptance::run_all(opt);
    bkt::acceptance::print_results(results);
    if (!bkt::acceptance::all_pass(results)) {
        std::printf("ACCEPTANCE: FAIL\n");
        return 1;
    }
    std::printf("ACCEPTANCE: PASS\n");
    return 0;
}
