#include <idla/acceptance.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

// Runs every acceptance criterion and prints one verdict line each.
// Usage: acceptance [seed] [threads]
int main(int argc, char** argv) {
    const std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 20240101;
    const unsigned threads = idla::resolve_threads(argc > 2 ? static_cast<unsigned>(std::stoul(argv[2])) : 0);
    std::cout << "acceptance suite, seed " << seed << ", " << threads << " thread(s)" << std::endl;
    int failed = 0;
    idla::acceptance::run_all(seed, threads, [&](const idla::acceptance::CriterionResult& r) {
        std::cout << idla::acceptance::format_line(r) << std::endl;
        failed += !r.passed;
    });
    std::cout << (failed ? std::to_string(failed) + " criterion(s) failed" : "all criteria passed") << std::endl;
    return failed ? EXIT_FAILURE : EXIT_SUCCESS;
}
