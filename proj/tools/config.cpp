#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "cli.hpp"
#include "svtv/image_io.hpp"

namespace svtv::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct KeyError : Error {
    using Error::Error;
};

double as_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out))
        throw KeyError("key '" + key + "': expected a number, got '" + v + "'");
    return out;
}

std::uint64_t as_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw KeyError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return out;
}

void check(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw KeyError("key '" + key + "': " + what);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"geometry.mode", [](RunConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.mode = parse_beam_mode(v);
             } catch (const Error& e) {
                 throw KeyError("key '" + k + "': " + e.what());
             }
         }},
        {"geometry.n_angles", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.n_angles = as_uint(k, v);
             check(c.n_angles >= 1, k, "must be >= 1");
         }},
        {"geometry.angle_range_deg", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.angle_range_deg = as_double(k, v);
             check(c.angle_range_deg > 0.0 && c.angle_range_deg <= 180.0, k, "must lie in (0, 180]");
         }},
        {"geometry.n_detectors", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.n_detectors = as_uint(k, v);
         }},
        {"geometry.detector_spacing", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.detector_spacing = as_double(k, v);
             check(c.detector_spacing > 0.0, k, "must be > 0");
         }},
        {"geometry.source_origin_dist", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.source_origin_dist = as_double(k, v);
             check(c.source_origin_dist > 0.0, k, "must be > 0");
         }},
        {"geometry.source_detector_dist", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.source_detector_dist = as_double(k, v);
             check(c.source_detector_dist > 0.0, k, "must be > 0");
         }},
        {"geometry.image_side", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.image_side = as_uint(k, v);
             check(c.image_side >= 1, k, "must be >= 1");
         }},
        {"geometry.projector_cache", [](RunConfig& c, const std::string&, const std::string& v) {
             c.projector_cache = v;
         }},
        {"gradient.boundary", [](RunConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.boundary = parse_boundary(v);
             } catch (const Error& e) {
                 throw KeyError("key '" + k + "': " + e.what());
             }
         }},
        {"phantom.preset", [](RunConfig& c, const std::string& k, const std::string& v) {
             bool known = false;
             for (auto name : phantom_presets()) known = known || name == v;
             check(known, k, "unknown preset '" + v + "'");
             c.phantom_preset = v;
         }},
        {"phantom.input", [](RunConfig& c, const std::string& k, const std::string& v) {
             check(std::filesystem::exists(v), k, "file '" + v + "' does not exist");
             c.phantom_input = v;
         }},
        {"noise.nu", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.noise.nu = as_double(k, v);
             check(c.noise.nu >= 0.0, k, "must be >= 0");
         }},
        {"noise.seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.noise.seed = as_uint(k, v); }},
        {"reconstructor.kind", [](RunConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.reconstructor.kind = parse_reconstructor_kind(v);
             } catch (const Error& e) {
                 throw KeyError("key '" + k + "': " + e.what());
             }
         }},
        {"reconstructor.cutoff", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.reconstructor.cutoff = as_double(k, v);
             check(c.reconstructor.cutoff > 0.0 && c.reconstructor.cutoff <= 1.0, k, "must lie in (0, 1]");
         }},
        {"reconstructor.lambda", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.reconstructor.lambda = as_double(k, v);
             check(c.reconstructor.lambda >= 0.0, k, "must be >= 0");
         }},
        {"reconstructor.iterations", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.reconstructor.iterations = as_uint(k, v);
             check(c.reconstructor.iterations >= 1, k, "must be >= 1");
         }},
        {"reconstructor.path", [](RunConfig& c, const std::string& k, const std::string& v) {
             check(std::filesystem::exists(v), k, "file '" + v + "' does not exist");
             c.reconstructor.path = v;
         }},
        {"weights.eta", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.weights.eta = as_double(k, v);
             check(c.weights.eta > 0.0, k, "must be > 0");
         }},
        {"weights.p", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.weights.p_exp = as_double(k, v);
             check(c.weights.p_exp > 0.0 && c.weights.p_exp < 1.0, k, "must lie in (0, 1)");
         }},
        {"solver.lambda", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.lambda = as_double(k, v);
             check(c.solver.lambda >= 0.0, k, "must be >= 0");
         }},
        {"solver.beta", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.beta = as_double(k, v);
             check(c.solver.beta >= 0.0 && c.solver.beta <= 1.0, k, "must lie in [0, 1]");
         }},
        {"solver.sigma", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.sigma = as_double(k, v);
             check(c.solver.sigma > 0.0, k, "must be > 0");
         }},
        {"solver.tau", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.tau = as_double(k, v);
             check(c.solver.tau > 0.0, k, "must be > 0");
         }},
        {"solver.max_iter", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.max_iter = as_uint(k, v);
             check(c.solver.max_iter >= 1, k, "must be >= 1");
         }},
        {"solver.eps_j", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.eps_j = as_double(k, v);
             check(c.solver.eps_j >= 0.0, k, "must be >= 0");
         }},
        {"solver.eps_x", [](RunConfig& c, const std::string& k, const std::string& v) {
             c.solver.eps_x = as_double(k, v);
             check(c.solver.eps_x >= 0.0, k, "must be >= 0");
         }},
        {"solver.f1_prox_variant", [](RunConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.solver.f1_prox_variant = parse_f1_variant(v);
             } catch (const Error& e) {
                 throw KeyError("key '" + k + "': " + e.what());
             }
         }},
        {"solver.gap_variant", [](RunConfig& c, const std::string& k, const std::string& v) {
             try {
                 c.solver.gap_variant = parse_gap_variant(v);
             } catch (const Error& e) {
                 throw KeyError("key '" + k + "': " + e.what());
             }
         }},
        {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
    };
    return table;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw Error(where + "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(where + "expected key = value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        const auto it = setters().find(key);
        if (it == setters().end()) throw Error(where + "unknown key '" + key + "'");
        if (value.empty()) throw Error(where + "key '" + key + "': empty value");
        if (const auto prev = seen.find(key); prev != seen.end())
            throw Error(where + "key '" + key + "' already set on line " + std::to_string(prev->second));
        seen[key] = line_no;
        try {
            it->second(cfg, key, value);
        } catch (const KeyError& e) {
            throw Error(where + e.what());
        }
    }
    // Cross-field checks.
    if (cfg.mode == BeamMode::fan) {
        if (cfg.source_origin_dist <= 0.0 || cfg.source_detector_dist <= 0.0)
            throw Error(source + ": key 'geometry.source_origin_dist': fan mode needs both source distances");
    }
    if (cfg.reconstructor.kind == ReconstructorKind::file && cfg.reconstructor.path.empty())
        throw Error(source + ": key 'reconstructor.path': required when reconstructor.kind = file");
    if (cfg.phantom_input.empty() && cfg.phantom_preset == "synthetic-ct" && cfg.image_side < 16)
        throw Error(source + ": key 'geometry.image_side': the synthetic-ct preset needs at least 16");
    cfg.geometry();  // surfaces geometry invariant violations at parse time
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

Geometry RunConfig::geometry() const {
    std::size_t nd = n_detectors;
    if (nd == 0) {
        if (mode == BeamMode::fan && source_origin_dist > 0.0) {
            const double mag = source_detector_dist / source_origin_dist;
            nd = static_cast<std::size_t>(
                     std::ceil(static_cast<double>(image_side) * std::numbers::sqrt2 * mag / detector_spacing)) +
                 1;
        } else {
            nd = static_cast<std::size_t>(
                     std::ceil(static_cast<double>(image_side) * std::numbers::sqrt2 / detector_spacing)) +
                 1;
        }
    }
    if (mode == BeamMode::fan)
        return Geometry::fan(image_side, n_angles, nd, source_origin_dist, source_detector_dist, angle_range_deg,
                             detector_spacing);
    return Geometry::parallel(image_side, n_angles, nd, angle_range_deg, detector_spacing);
}

SparseOperator load_or_build_projector(const RunConfig& cfg) {
    const Geometry geom = cfg.geometry();
    if (!cfg.projector_cache.empty() && std::filesystem::exists(cfg.projector_cache)) {
        SparseOperator K = load_csr(cfg.projector_cache);
        if (K.rows() == geom.n_rays() && K.cols() == geom.n_pixels()) return K;
        throw Error("projector cache " + cfg.projector_cache.string() + " does not match the configured geometry");
    }
    SparseOperator K = build_projector(geom);
    if (!cfg.projector_cache.empty()) save_csr(K, cfg.projector_cache);
    return K;
}

Image ground_truth(const RunConfig& cfg) {
    if (!cfg.phantom_input.empty()) return read_image(cfg.phantom_input, cfg.image_side);
    return make_phantom(preset_phantom(cfg.phantom_preset, cfg.image_side));
}

}  // namespace svtv::cli
