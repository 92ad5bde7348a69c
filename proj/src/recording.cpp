#include "enclosure/recording.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace enclosure {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec_list(const std::vector<Vec3>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back({x.x(), x.y(), x.z()});
    return a;
}

std::vector<Vec3> read_vecs(const json& a) {
    std::vector<Vec3> v;
    for (const auto& e : a) v.emplace_back(e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>());
    return v;
}

// interleave volume and sphere blocks per time level
void write_block(const std::string& path, const WaveRecording& r, const std::vector<double>& vu,
                 const std::vector<double>& su) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    const std::size_t nv = r.volume_nodes.size(), ns = r.sphere_nodes.size();
    for (int n = 0; n < r.times(); ++n) {
        if (nv) out.write(reinterpret_cast<const char*>(vu.data() + n * nv), static_cast<std::streamsize>(nv * 8));
        if (ns) out.write(reinterpret_cast<const char*>(su.data() + n * ns), static_cast<std::streamsize>(ns * 8));
    }
}

void read_block(const std::string& path, const WaveRecording& r, std::vector<double>& vu, std::vector<double>& su) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    const std::size_t nv = r.volume_nodes.size(), ns = r.sphere_nodes.size();
    vu.assign(nv * r.times(), 0.0);
    su.assign(ns * r.times(), 0.0);
    for (int n = 0; n < r.times(); ++n) {
        if (nv) in.read(reinterpret_cast<char*>(vu.data() + n * nv), static_cast<std::streamsize>(nv * 8));
        if (ns) in.read(reinterpret_cast<char*>(su.data() + n * ns), static_cast<std::streamsize>(ns * 8));
    }
    if (!in) throw Error(ErrorCode::IoError, "truncated sample file " + path);
}

}  // namespace

void save_recording(const WaveRecording& r, const std::string& dir, bool csv) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir);
    json m;
    m["format"] = "enclosure-recording-1";
    m["dt"] = r.dt;
    m["steps"] = r.steps;
    m["dx"] = r.dx;
    m["scenario_hash"] = r.scenario_hash;
    m["source"] = {{"center", {r.source.p.x(), r.source.p.y(), r.source.p.z()}}, {"radius", r.source.eta}};
    m["observation_radius"] = r.R;
    m["robin"] = {{"gamma", r.gamma}, {"beta", r.beta}};
    m["volume_nodes"] = vec_list(r.volume_nodes);
    m["volume_weights"] = r.volume_weights;
    m["sphere_nodes"] = vec_list(r.sphere_nodes);
    m["sphere_weights"] = r.sphere_weights;
    m["layout"] = "time-major float64; per level: volume nodes then sphere nodes";
    m["has_reference"] = r.has_reference();
    m["energy"] = r.energy;
    {
        std::ofstream out(dir + "/metadata.json");
        if (!out) throw Error(ErrorCode::IoError, "cannot write metadata");
        out << m.dump(1) << "\n";
    }
    write_block(dir + "/samples.bin", r, r.volume_u, r.sphere_u);
    if (r.has_reference()) write_block(dir + "/reference.bin", r, r.volume_ref, r.sphere_ref);
    if (csv) {
        std::FILE* f = std::fopen((dir + "/samples.csv").c_str(), "w");
        if (!f) throw Error(ErrorCode::IoError, "cannot write samples.csv");
        const std::size_t nv = r.volume_nodes.size(), ns = r.sphere_nodes.size();
        std::fprintf(f, "t");
        for (std::size_t i = 0; i < nv; ++i) std::fprintf(f, ",v%zu", i);
        for (std::size_t i = 0; i < ns; ++i) std::fprintf(f, ",s%zu", i);
        std::fprintf(f, "\n");
        for (int n = 0; n < r.times(); ++n) {
            std::fprintf(f, "%.17g", n * r.dt);
            for (std::size_t i = 0; i < nv; ++i) std::fprintf(f, ",%.17g", r.volume_u[n * nv + i]);
            for (std::size_t i = 0; i < ns; ++i) std::fprintf(f, ",%.17g", r.sphere_u[n * ns + i]);
            std::fprintf(f, "\n");
        }
        std::fclose(f);
    }
}

WaveRecording load_recording(const std::string& dir) {
    std::ifstream in(dir + "/metadata.json");
    if (!in) throw Error(ErrorCode::IoError, "no metadata.json in " + dir);
    json m;
    try {
        in >> m;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("metadata: ") + e.what());
    }
    WaveRecording r;
    try {
        r.dt = m.at("dt").get<double>();
        r.steps = m.at("steps").get<int>();
        r.dx = m.at("dx").get<double>();
        r.scenario_hash = m.at("scenario_hash").get<std::string>();
        const auto& c = m.at("source").at("center");
        r.source.p = Vec3(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
        r.source.eta = m.at("source").at("radius").get<double>();
        r.R = m.at("observation_radius").get<double>();
        r.gamma = m.at("robin").at("gamma").get<double>();
        r.beta = m.at("robin").at("beta").get<double>();
        r.volume_nodes = read_vecs(m.at("volume_nodes"));
        r.volume_weights = m.at("volume_weights").get<std::vector<double>>();
        r.sphere_nodes = read_vecs(m.at("sphere_nodes"));
        r.sphere_weights = m.at("sphere_weights").get<std::vector<double>>();
        if (m.contains("energy")) r.energy = m.at("energy").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("metadata: ") + e.what());
    }
    read_block(dir + "/samples.bin", r, r.volume_u, r.sphere_u);
    if (m.value("has_reference", false)) read_block(dir + "/reference.bin", r, r.volume_ref, r.sphere_ref);
    return r;
}

}  // namespace enclosure
