#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tagmine/corpus.hpp"
#include "tagmine/pipeline.hpp"

namespace testing_util {

inline tagmine::Post post(std::string id, std::string user, std::vector<std::string> tags,
                          std::int64_t t = 1420070400) {
    tagmine::Post p;
    p.media_id = std::move(id);
    p.user_id = std::move(user);
    p.username = p.user_id;
    p.created_at = t;
    p.hashtags = std::move(tags);
    return p;
}

inline std::string source_file(const std::string& rel) {
    return tagmine::read_file_bytes(std::filesystem::path(TAGMINE_SOURCE_DIR) / rel);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("tagmine-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing_util
