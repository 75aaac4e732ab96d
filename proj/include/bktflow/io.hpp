// io.hpp -- run configuration (flat key=value with CLI overrides), output
// metadata, and the golden-value registry.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bkt::io {

struct RunConfig {
    int L = 16;
    int R = 3;
    double alpha2 = 8.0 * 3.14159265358979323846;
    double eta = 0.5;
    double z = 1e-3;
    int j_max = 8;
    int j_freeze = 12;
    double tol = 1e-12;
    std::string cutoff = "gauss";
    std::uint64_t seed = 20240817;
    std::string outdir = "out";
    int threads = 1;
    std::map<std::string, std::string> extra;

    void validate() const;
    std::string serialize() const;         // canonical key=value lines
    std::uint64_t hash() const;            // FNV-1a of the serialization
    static RunConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
};

// "# key=value" metadata lines for CSV headers
std::vector<std::string> metadata_lines(const RunConfig& cfg,
                                        const std::string& command);

struct GoldenRegistry {
    std::string path;
    std::map<std::string, double> values;

    static GoldenRegistry load(const std::string& path);
    void save() const;
    // key = command + "/" + name + "@" + config hash
    std::optional<double> lookup(const std::string& key) const;
    void bless(const std::string& key, double value);
};

}  // namespace bkt::io
