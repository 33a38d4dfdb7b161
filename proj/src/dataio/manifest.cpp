#include "dmad/dataio/manifest.hpp"

#include "dmad/core/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace dmad::dataio {

namespace fs = std::filesystem;
using nlohmann::json;

const ClassEntry& DatasetManifest::find(const std::string& class_name) const {
    for (const auto& c : classes) {
        if (c.class_name == class_name) return c;
    }
    throw ArgumentError("class '" + class_name + "' not in manifest at " + root.string());
}

void save_manifest(const DatasetManifest& manifest) {
    json classes = json::array();
    for (const auto& c : manifest.classes) {
        classes.push_back({{"class_name", c.class_name}, {"seed", c.seed}, {"train", c.train}, {"test", c.test}});
    }
    const json j = {{"image_size", manifest.image_size}, {"classes", classes}};
    std::ofstream out(manifest.root / "manifest.json");
    if (!out) throw IoError("cannot write " + (manifest.root / "manifest.json").string());
    out << j.dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& root) {
    const fs::path path = root / "manifest.json";
    std::ifstream in(path);
    if (!in) throw IoError("missing manifest " + path.string());

    DatasetManifest m;
    m.root = root;
    try {
        const json j = json::parse(in);
        m.image_size = j.at("image_size").get<int>();
        for (const auto& c : j.at("classes")) {
            ClassEntry e;
            e.class_name = c.at("class_name").get<std::string>();
            e.seed = c.at("seed").get<std::uint64_t>();
            e.train = c.at("train").get<std::vector<std::string>>();
            e.test = c.at("test").get<std::vector<std::string>>();
            m.classes.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw FormatError("corrupt manifest " + path.string() + ": " + e.what());
    }

    for (const auto& c : m.classes) {
        std::set<std::string> ids;
        for (const auto* split : {&c.train, &c.test}) {
            for (const auto& rel : *split) {
                if (!fs::is_directory(root / rel)) throw IoError("manifest references missing sample " + rel);
                if (!ids.insert(fs::path(rel).filename().string()).second) {
                    throw FormatError("duplicate sample id " + rel + " in class " + c.class_name);
                }
            }
        }
    }
    return m;
}

}  // namespace dmad::dataio
