#pragma once

#include "gnv/backend.hpp"
#include "gnv/util.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace gnv_test {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("gnv_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path write_script(const std::filesystem::path& path,
                                          const nlohmann::json& script) {
    gnv::write_text_file(path, script.dump(2));
    return path;
}

inline gnv::BackendEndpoint mock_endpoint(gnv::BackendRole role,
                                          const std::filesystem::path& script) {
    gnv::BackendEndpoint e;
    e.role = role;
    e.base_url = script.string();
    e.backoff_ms = 1;
    return e;
}

}  // namespace gnv_test
