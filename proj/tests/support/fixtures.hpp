#pragma once

#include "sgaudit/common/png.hpp"
#include "sgaudit/graph/operations.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

/// Small distinct PNGs, without going through any adapter.
inline std::vector<sgaudit::Bytes> pngs(int count, int salt = 0) {
    std::vector<sgaudit::Bytes> out;
    for (int i = 0; i < count; ++i) {
        sgaudit::Bytes rgb(4 * 4 * 3);
        for (std::size_t k = 0; k < rgb.size(); ++k) rgb[k] = static_cast<std::uint8_t>(k * 7 + i * 31 + salt * 101);
        out.push_back(sgaudit::encode_png_rgb(4, 4, rgb));
    }
    return out;
}

/// Object spec with default scope and origin.
inline sgaudit::graph::NodeSpec object(std::string name) {
    sgaudit::graph::NodeSpec spec;
    spec.name = std::move(name);
    return spec;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("sgaudit-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
