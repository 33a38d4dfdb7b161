#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dmad::dataio {

struct ClassEntry {
    std::string class_name;
    std::vector<std::string> train;  // sample directories, relative to the manifest root
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    std::filesystem::path root;
    int image_size = 0;
    std::vector<ClassEntry> classes;

    const ClassEntry& find(const std::string& class_name) const;
    std::filesystem::path resolve(const std::string& rel) const { return root / rel; }
};

// Writes <root>/manifest.json.
void save_manifest(const DatasetManifest& manifest);

// Reads <root>/manifest.json and checks that every listed sample directory
// exists and that sample ids are unique within each class.
DatasetManifest load_manifest(const std::filesystem::path& root);

}  // namespace dmad::dataio
