#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bo/errors.hpp"
#include "bo/grid.hpp"
#include "bo/pde_sim.hpp"
#include "bo/rational.hpp"

namespace bo {

using json = nlohmann::json;

inline json symbol_to_json(const RealRationalSymbol& u0) {
    json poles = json::array();
    for (const auto& pl : u0.poles)
        poles.push_back({{"re_c", pl.c.real()},
                         {"im_c", pl.c.imag()},
                         {"re_p", pl.p.real()},
                         {"im_p", pl.p.imag()}});
    return json{{"poles", poles}};
}

/// Accepts either the pole list form {"poles":[{re_c,im_c,re_p,im_p},...]}
/// or the P/Q form {"p":[...],"q":[...]} with ascending real coefficient
/// arrays (optionally "perturbation" for multiple roots of Q).
inline RealRationalSymbol symbol_from_json(const json& j) {
    if (j.contains("p") && j.contains("q")) {
        auto poly = [](const json& arr) {
            std::vector<cplx> c;
            for (const auto& v : arr) c.push_back(cplx(v.get<double>(), 0.0));
            return ComplexPoly(std::move(c));
        };
        const double pert = j.value("perturbation", 0.0);
        return symbol_from_pq(poly(j["p"]), poly(j["q"]), pert).symbol;
    }
    if (!j.contains("poles") || !j["poles"].is_array())
        throw ConfigError("symbol json: missing \"poles\" array");
    std::vector<RealRationalSymbol::Pole> poles;
    for (const auto& e : j["poles"]) {
        for (const char* key : {"re_c", "im_c", "re_p", "im_p"})
            if (!e.contains(key)) throw ConfigError(std::string("symbol json: missing ") + key);
        poles.push_back({cplx(e["re_c"].get<double>(), e["im_c"].get<double>()),
                         cplx(e["re_p"].get<double>(), e["im_p"].get<double>())});
    }
    return RealRationalSymbol(std::move(poles));
}

inline RealRationalSymbol load_symbol(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open symbol file: " + path);
    json j;
    in >> j;
    return symbol_from_json(j);
}

inline json grid_to_json(const FourierGrid& g) { return json{{"xi_max", g.xi_max}, {"m", g.m}}; }

inline FourierGrid grid_from_json(const json& j) {
    FourierGrid g;
    if (j.contains("xi_max")) g.xi_max = j["xi_max"].get<double>();
    if (j.contains("m")) g.m = j["m"].get<int>();
    if (g.m < 64) throw ConfigError("grid json: m must be >= 64");
    return g;
}

inline json sim_config_to_json(const SimConfig& c) {
    return json{{"n", c.n},
                {"eps", c.eps},
                {"length", c.domain_half_length},
                {"points", c.grid_points},
                {"dt", c.dt},
                {"t_final", c.t_final},
                {"dealias_fraction", c.dealias_fraction}};
}

inline SimConfig sim_config_from_json(const json& j) {
    SimConfig c;
    if (j.contains("n")) c.n = j["n"].get<int>();
    if (j.contains("eps")) c.eps = j["eps"].get<double>();
    if (j.contains("length")) c.domain_half_length = j["length"].get<double>();
    if (j.contains("points")) c.grid_points = j["points"].get<int>();
    if (j.contains("dt")) c.dt = j["dt"].get<double>();
    if (j.contains("t_final")) c.t_final = j["t_final"].get<double>();
    if (j.contains("dealias_fraction")) c.dealias_fraction = j["dealias_fraction"].get<double>();
    c.validate();
    return c;
}

/// FNV-1a over the canonical dump; stable across runs and builds.
inline std::uint64_t config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setfill('0') << std::setw(16) << h;
    return os.str();
}

/// CSV sink that embeds the config hash and seed in a leading comment line.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, std::uint64_t cfg_hash, std::uint64_t seed,
              const std::string& header)
        : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        out_ << "# config_hash=" << hash_hex(cfg_hash) << " seed=" << seed << "\n";
        out_ << header << "\n";
        out_ << std::setprecision(17);
    }

    template <typename... Ts>
    void row(const Ts&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, out_ << fields), ...);
        out_ << "\n";
    }

    std::ostream& stream() { return out_; }

  private:
    std::ofstream out_;
};

/// Diagnostic operator dump: 16-byte header {magic "BOHG", u32 M, u32
/// reserved, u32 pad} followed by M*M little-endian complex doubles,
/// row-major.
inline void write_operator(const std::string& path, const GridOperator& op) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open operator dump: " + path);
    const char magic[4] = {'B', 'O', 'H', 'G'};
    const std::uint32_t m = static_cast<std::uint32_t>(op.a.rows());
    const std::uint32_t reserved = 0;
    const std::uint32_t pad = 0;
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&m), 4);
    out.write(reinterpret_cast<const char*>(&reserved), 4);
    out.write(reinterpret_cast<const char*>(&pad), 4);
    for (Eigen::Index r = 0; r < op.a.rows(); ++r)
        for (Eigen::Index c = 0; c < op.a.cols(); ++c) {
            const double re = op.a(r, c).real();
            const double im = op.a(r, c).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
}

inline GridOperator read_operator(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open operator dump: " + path);
    char magic[4];
    std::uint32_t m = 0, reserved = 0, pad = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&m), 4);
    in.read(reinterpret_cast<char*>(&reserved), 4);
    in.read(reinterpret_cast<char*>(&pad), 4);
    if (std::memcmp(magic, "BOHG", 4) != 0) throw ConfigError("operator dump: bad magic");
    GridOperator op;
    op.a.resize(m, m);
    for (std::uint32_t r = 0; r < m; ++r)
        for (std::uint32_t c = 0; c < m; ++c) {
            double re = 0.0, im = 0.0;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            op.a(r, c) = cplx(re, im);
        }
    if (!in) throw ConfigError("operator dump: truncated file");
    op.name = "loaded";
    return op;
}

}  // namespace bo
