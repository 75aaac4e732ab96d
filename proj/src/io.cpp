#include "bktflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bkt::io {

void RunConfig::validate() const {
    if (L < 2) throw std::invalid_argument("config: L >= 2");
    if (R < 1) throw std::invalid_argument("config: R >= 1");
    if (!(alpha2 > 0.0)) throw std::invalid_argument("config: alpha2 > 0");
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("config: eta in (0,1)");
    if (!(z >= 0.0)) throw std::invalid_argument("config: z >= 0");
    if (j_max < 1) throw std::invalid_argument("config: j_max >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("config: tol > 0");
    if (threads < 1) throw std::invalid_argument("config: threads >= 1");
}

std::string RunConfig::serialize() const {
    char buf[640];
    std::snprintf(buf, sizeof buf,
                  "L=%d\nR=%d\nalpha2=%.17g\ncutoff=%s\neta=%.17g\n"
                  "j_freeze=%d\nj_max=%d\nseed=%llu\nthreads=%d\n"
                  "tol=%.17g\nz=%.17g\n",
                  L, R, alpha2, cutoff.c_str(), eta, j_freeze, j_max,
                  static_cast<unsigned long long>(seed), threads, tol, z);
    std::string out(buf);
    for (const auto& [k, v] : extra) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t RunConfig::hash() const {
    const std::string s = serialize();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "L") L = std::stoi(value);
    else if (key == "R") R = std::stoi(value);
    else if (key == "alpha2") alpha2 = std::stod(value);
    else if (key == "eta") eta = std::stod(value);
    else if (key == "z") z = std::stod(value);
    else if (key == "j_max") j_max = std::stoi(value);
    else if (key == "j_freeze") j_freeze = std::stoi(value);
    else if (key == "tol") tol = std::stod(value);
    else if (key == "cutoff") cutoff = value;
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "outdir") outdir = value;
    else if (key == "threads") threads = std::stoi(value);
    else extra[key] = value;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: bad line: " + line);
        cfg.apply(line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

std::vector<std::string> metadata_lines(const RunConfig& cfg,
                                        const std::string& command) {
    std::vector<std::string> out;
    out.push_back("command=" + command);
    std::istringstream ss(cfg.serialize());
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    char buf[64];
    std::snprintf(buf, sizeof buf, "config_hash=%016llx",
                  static_cast<unsigned long long>(cfg.hash()));
    out.push_back(buf);
    return out;
}

GoldenRegistry GoldenRegistry::load(const std::string& path) {
    GoldenRegistry reg;
    reg.path = path;
    std::ifstream in(path);
    if (in) {
        nlohmann::json j;
        in >> j;
        for (auto it = j.begin(); it != j.end(); ++it)
            reg.values[it.key()] = it.value().get<double>();
    }
    return reg;
}

void GoldenRegistry::save() const {
    nlohmann::json j;
    for (const auto& [k, v] : values) j[k] = v;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("golden: cannot open " + path);
    out << j.dump(2) << "\n";
}

std::optional<double> GoldenRegistry::lookup(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

void GoldenRegistry::bless(const std::string& key, double value) {
    values[key] = value;
}

}  // namespace bkt::io
