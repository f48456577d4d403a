#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include "rwpm/renewal.hpp"
#include "rwpm/walk_model.hpp"

namespace rwpm_test {

// Scratch directory shared by all test cases (renewal blobs, CSV files).
// RWPM_TEST_TMP lets ctest point it into the build tree.
inline std::string scratch_dir() {
    static std::string dir = [] {
        const char* env = std::getenv("RWPM_TEST_TMP");
        std::filesystem::path p = env && *env
            ? std::filesystem::path(env)
            : std::filesystem::temp_directory_path() / "rwpm_tests";
        std::filesystem::create_directories(p);
        return p.string();
    }();
    return dir;
}

// One disk-cached lazy3 pair law reused across suites. n_max 5000 covers the
// largest horizon any unit test touches; the blob persists across reruns.
inline const rwpm::RenewalLaw& law3() {
    static rwpm::RenewalLaw law = rwpm::cached_renewal(
        rwpm::model_by_id("lazy3"), rwpm::model_by_id("lazy3"), 5000, scratch_dir());
    return law;
}

}  // namespace rwpm_test
