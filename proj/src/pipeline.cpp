#include "umbra/pipeline.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "umbra/penumbra.hpp"

namespace umbra {

void PipelineConfig::validate() const {
    relight.validate();
    detect.validate();
    if (penumbra_radius < 1) throw ConfigError("pipeline: penumbra_radius must be >= 1");
    if (threads < 1) throw ConfigError("pipeline: threads must be >= 1");
}

namespace {
std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "off" || value == "no") return false;
    throw ConfigError("config: bad boolean value for " + key + ": '" + value + "'");
}
}  // namespace

void apply_config_entry(const std::string& key, const std::string& value, PipelineConfig& cfg) {
    if (key == "n_neighbors")
        cfg.relight.n_neighbors = parse_int(key, value);
    else if (key == "superpixel_size")
        cfg.relight.superpixel_size = parse_int(key, value);
    else if (key == "alpha")
        cfg.relight.alpha = parse_real(key, value);
    else if (key == "beta")
        cfg.relight.beta = parse_real(key, value);
    else if (key == "gamma")
        cfg.relight.gamma = parse_real(key, value);
    else if (key == "epsilon")
        cfg.relight.epsilon = parse_real(key, value);
    else if (key == "fallback_threshold")
        cfg.relight.fallback_threshold = parse_real(key, value);
    else if (key == "fallback_top_k")
        cfg.relight.fallback_top_k = parse_int(key, value);
    else if (key == "normalize_weights")
        cfg.relight.normalize_weights = parse_bool(key, value);
    else if (key == "penumbra_radius")
        cfg.penumbra_radius = parse_int(key, value);
    else if (key == "smoothing")
        cfg.smoothing = parse_bool(key, value);
    else if (key == "threads")
        cfg.threads = parse_int(key, value);
    else if (key == "value_percentile")
        cfg.detect.value_percentile = parse_real(key, value);
    else if (key == "sat_min")
        cfg.detect.sat_min = parse_real(key, value);
    else if (key == "min_component")
        cfg.detect.min_component = parse_int(key, value);
    else
        throw ConfigError("config: unknown key '" + key + "'");
}

void apply_config_text(const std::string& text, PipelineConfig& cfg) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not a key=value entry: '" + line + "'");
        apply_config_entry(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), cfg);
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    PipelineConfig cfg;
    apply_config_text(buf.str(), cfg);
    cfg.validate();
    return cfg;
}

RemovalResult run_pipeline(const ImageBuffer& img, const ShadowMask& mask,
                           const PipelineConfig& cfg) {
    cfg.validate();
    RemovalResult res = remove_shadows(img, mask, cfg.relight, cfg.threads);
    if (cfg.smoothing && mask.shadow_count() > 0) {
        PenumbraBand band = extract_penumbra(mask, cfg.penumbra_radius);
        res.image = smooth_boundary(img, res.image, band);
    }
    return res;
}

}  // namespace umbra
