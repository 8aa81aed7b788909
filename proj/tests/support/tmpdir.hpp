#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

// Fresh directory under DEPTHSCOPE_TEST_TMP (or the system temp dir), removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        const char* root = std::getenv("DEPTHSCOPE_TEST_TMP");
        std::filesystem::path base = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path();
        std::random_device rd;
        path_ = base / (tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};
