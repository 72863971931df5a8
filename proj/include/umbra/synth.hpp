#ifndef UMBRA_SYNTH_HPP
#define UMBRA_SYNTH_HPP

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "umbra/image.hpp"
#include "umbra/metrics.hpp"

namespace umbra {

/// Synthetic multiplicative-shadow generator: textured background, one
/// convex darkened polygon (the umbra, which the mask covers exactly), and a
/// 2-px linear penumbra ramp just outside the polygon. Deterministic per
/// (seed, index).
struct SynthParams {
    uint32_t seed = 1;
    int count = 20;
    int size = 176;  // square images; must be a multiple of 16

    void validate() const;
};

struct SynthCase {
    int index = 0;
    int size = 0;
    std::string texture;  // checker | gradient | noise
    ImageBuffer truth;    // pre-darkening image
    ImageBuffer shadowed;
    ShadowMask mask;  // exactly the fully darkened polygon interior
    RegionPairAnnotation ann;
    std::array<double, 3> factors{};  // per-channel darkening inside the umbra
    size_t umbra_pixels = 0;

    double mean_factor() const { return (factors[0] + factors[1] + factors[2]) / 3.0; }
};

SynthCase make_synth_case(const SynthParams& params, int index);

std::string synth_case_name(int index);  // "case_007"

/// Writes case_NNN.png / _truth.png / _mask.png / _ann.png / _meta.txt.
void write_synth_case(const SynthCase& c, const std::string& dir);

/// Generates params.count cases into dir; returns the case base names.
std::vector<std::string> generate_synth_suite(const SynthParams& params, const std::string& dir);

/// Reads a flat key=value file (the _meta.txt format).
std::map<std::string, std::string> read_kv_file(const std::string& path);

}  // namespace umbra

#endif
