#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "umbra/image.hpp"
#include "umbra/penumbra.hpp"

using namespace umbra;

TEST_CASE("morph matches the brute-force diamond oracle") {
    std::mt19937 rng(51);
    for (double density : {0.08, 0.35, 0.7}) {
        for (int trial = 0; trial < 3; ++trial) {
            ShadowMask m = oracle::random_mask(rng, 32, 24, density);
            for (int r : {1, 2, 3, 5}) {
                CHECK(morph(m, r, MorphOp::Dilate) == oracle::morph_brute(m, r, MorphOp::Dilate));
                CHECK(morph(m, r, MorphOp::Erode) == oracle::morph_brute(m, r, MorphOp::Erode));
            }
        }
    }
}

TEST_CASE("morph analytic shapes") {
    // A single center pixel dilated by r=2 becomes a 13-pixel diamond.
    ShadowMask dot(9, 9);
    dot.at(4, 4) = 1;
    ShadowMask d2 = morph(dot, 2, MorphOp::Dilate);
    CHECK(d2.shadow_count() == 13);
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 9; ++x)
            CHECK(d2.at(x, y) == (std::abs(x - 4) + std::abs(y - 4) <= 2 ? 1 : 0));

    // Dilation clips at the border instead of wrapping.
    ShadowMask corner(6, 6);
    corner.at(0, 0) = 1;
    CHECK(morph(corner, 1, MorphOp::Dilate).shadow_count() == 3);

    // Erosion shrinks at the border: a full 5x5 keeps only the 3x3 interior.
    ShadowMask full(5, 5, 1);
    ShadowMask e1 = morph(full, 1, MorphOp::Erode);
    CHECK(e1.shadow_count() == 9);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            CHECK(e1.at(x, y) == ((x >= 1 && x <= 3 && y >= 1 && y <= 3) ? 1 : 0));

    CHECK(morph(dot, 0, MorphOp::Dilate) == dot);
    CHECK(morph(dot, 0, MorphOp::Erode) == dot);
    CHECK_THROWS_AS(morph(dot, -1, MorphOp::Dilate), ConfigError);
}

TEST_CASE("manhattan_distance matches a BFS oracle") {
    std::mt19937 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<int> dim(1, 40);
        std::uniform_real_distribution<double> dens(0.0, 0.3);
        ShadowMask m = oracle::random_mask(rng, dim(rng), dim(rng), dens(rng));
        CHECK(manhattan_distance(m) == oracle::manhattan_bfs(m));
    }

    ShadowMask empty(7, 5);
    for (int32_t d : manhattan_distance(empty)) CHECK(d == kUnreachable);

    ShadowMask one(5, 4);
    one.at(2, 1) = 1;
    auto dist = manhattan_distance(one);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x)
            CHECK(dist[y * 5 + x] == std::abs(x - 2) + std::abs(y - 1));
}

TEST_CASE("extract_penumbra assembles band and distance fields consistently") {
    std::mt19937 rng(57);
    for (int trial = 0; trial < 6; ++trial) {
        ShadowMask blob(36, 28);
        std::uniform_int_distribution<int> cx(6, 29), cy(6, 21), half(3, 8);
        int bx = cx(rng), by = cy(rng), hw = half(rng), hh = half(rng);
        for (int y = std::max(0, by - hh); y < std::min(28, by + hh); ++y)
            for (int x = std::max(0, bx - hw); x < std::min(36, bx + hw); ++x) blob.at(x, y) = 1;

        int r = 3;
        PenumbraBand pb = extract_penumbra(blob, r);
        CHECK(pb.radius == r);
        ShadowMask dilated = morph(blob, r, MorphOp::Dilate);
        ShadowMask eroded = morph(blob, r, MorphOp::Erode);
        for (size_t i = 0; i < pb.band.labels().size(); ++i)
            CHECK(pb.band.labels()[i] ==
                  ((dilated.labels()[i] && !eroded.labels()[i]) ? 1 : 0));

        ShadowMask inner_ref = eroded.shadow_count() > 0 ? eroded : blob;
        CHECK(pb.dist_inner == manhattan_distance(inner_ref));
        ShadowMask lit(36, 28);
        for (size_t i = 0; i < lit.labels().size(); ++i)
            lit.labels()[i] = dilated.labels()[i] ? 0 : 1;
        if (lit.shadow_count() > 0) CHECK(pb.dist_outer == manhattan_distance(lit));

        // Band pixels always see finite distances on both sides.
        for (size_t i = 0; i < pb.band.labels().size(); ++i)
            if (pb.band.labels()[i]) {
                CHECK(pb.dist_inner[i] < kUnreachable);
                CHECK(pb.dist_outer[i] < kUnreachable);
            }
    }
}

TEST_CASE("boundary blend follows t = dist_outer/(dist_inner+dist_outer)") {
    // Vertical shadow edge: mask covers x <= 15 on a 32x16 canvas, r=2.
    // original = 0 everywhere, relit = 1 inside the mask. Working out the
    // blend and the single 3x3 mean by hand gives the center-row profile
    // 1, 0.8, 7/15, 0.2, 0, 0 across x = 13..18.
    ShadowMask mask(32, 16);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x <= 15; ++x) mask.at(x, y) = 1;
    ImageBuffer original(32, 16, 1, 0.0f);
    ImageBuffer relit(32, 16, 1, 0.0f);
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x <= 15; ++x) relit.at(x, y) = 1.0f;

    PenumbraBand pb = extract_penumbra(mask, 2);
    const int y = 8;
    CHECK(pb.band.at(13, y) == 0);  // eroded core
    CHECK(pb.band.at(14, y) == 1);
    CHECK(pb.band.at(17, y) == 1);
    CHECK(pb.band.at(18, y) == 0);
    CHECK(pb.dist_inner[y * 32 + 14] == 1);
    CHECK(pb.dist_outer[y * 32 + 14] == 4);
    CHECK(pb.dist_inner[y * 32 + 17] == 4);
    CHECK(pb.dist_outer[y * 32 + 17] == 1);

    ImageBuffer out = smooth_boundary(original, relit, pb);
    CHECK(out.at(12, y) == doctest::Approx(1.0));
    CHECK(out.at(13, y) == doctest::Approx(1.0));
    CHECK(out.at(14, y) == doctest::Approx(0.8).epsilon(1e-5));
    CHECK(out.at(15, y) == doctest::Approx(7.0 / 15.0).epsilon(1e-5));
    CHECK(out.at(16, y) == doctest::Approx(0.2).epsilon(1e-5));
    CHECK(out.at(17, y) == doctest::Approx(0.0).scale(1));
    CHECK(out.at(18, y) == doctest::Approx(0.0).scale(1));
    for (int x = 12; x < 19; ++x)  // profile decays monotonically outward
        CHECK(out.at(x, y) >= out.at(x + 1, y));
}

TEST_CASE("smooth_boundary passes non-band pixels through from the relit buffer") {
    std::mt19937 rng(59);
    ImageBuffer original = oracle::random_image(rng, 40, 30, 3);
    ImageBuffer relit = oracle::random_image(rng, 40, 30, 3);
    ShadowMask mask(40, 30);
    for (int y = 10; y < 22; ++y)
        for (int x = 8; x < 30; ++x) mask.at(x, y) = 1;
    PenumbraBand pb = extract_penumbra(mask, 3);
    ImageBuffer out = smooth_boundary(original, relit, pb);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 30; ++y)
            for (int x = 0; x < 40; ++x)
                if (!pb.band.at(x, y)) CHECK(out.at(x, y, c) == relit.at(x, y, c));
}

TEST_CASE("smooth_boundary leaves a constant scene untouched") {
    ImageBuffer img(24, 20, 3, 0.37f);
    ShadowMask mask(24, 20);
    for (int y = 5; y < 15; ++y)
        for (int x = 5; x < 19; ++x) mask.at(x, y) = 1;
    ImageBuffer out = smooth_boundary(img, img, extract_penumbra(mask, 3));
    for (float v : out.data()) CHECK(v == doctest::Approx(0.37f));
}

TEST_CASE("degenerate masks still produce finite blends") {
    // A 1-pixel-thick line erodes away entirely; the inner reference falls
    // back to the mask itself.
    ShadowMask line(30, 12);
    for (int x = 4; x < 26; ++x) line.at(x, 6) = 1;
    PenumbraBand pb = extract_penumbra(line, 3);
    CHECK(morph(line, 3, MorphOp::Erode).shadow_count() == 0);
    CHECK(pb.dist_inner == manhattan_distance(line));
    std::mt19937 rng(61);
    ImageBuffer original = oracle::random_image(rng, 30, 12, 3);
    ImageBuffer relit = oracle::random_image(rng, 30, 12, 3);
    ImageBuffer out = smooth_boundary(original, relit, pb);
    for (float v : out.data()) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }

    // Full-image mask: no lit exterior at all.
    ShadowMask all(10, 8, 1);
    PenumbraBand pf = extract_penumbra(all, 2);
    ImageBuffer o2(10, 8, 3, 0.3f), r2(10, 8, 3, 0.7f);
    ImageBuffer out2 = smooth_boundary(o2, r2, pf);
    for (float v : out2.data()) CHECK(std::isfinite(v));
}

TEST_CASE("smooth_boundary validates shapes") {
    ImageBuffer a(10, 10, 3), b(10, 9, 3);
    ShadowMask m(10, 10);
    m.at(5, 5) = 1;
    PenumbraBand pb = extract_penumbra(m, 2);
    CHECK_THROWS_AS(smooth_boundary(a, b, pb), DimensionError);
    PenumbraBand wrong = extract_penumbra(ShadowMask(9, 10), 2);
    CHECK_THROWS_AS(smooth_boundary(a, a, wrong), DimensionError);
}
