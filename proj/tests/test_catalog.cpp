#include "core/catalog.hpp"
#include "core/errors.hpp"

#include <doctest.h>

#include <random>

using archbench::Arg;
using archbench::Error;
using archbench::ErrorCode;
using archbench::ModuleKind;
using archbench::TensorShape;
namespace catalog = archbench::catalog;

namespace {
std::vector<Arg> args(std::initializer_list<std::int64_t> values) {
    std::vector<Arg> out;
    for (std::int64_t v : values) out.emplace_back(v);
    return out;
}
} // namespace

TEST_CASE("conv output shapes") {
    CHECK(catalog::conv_output_shape({3, 640, 640}, 16, 3, 2) == TensorShape{16, 320, 320});
    CHECK(catalog::conv_output_shape({64, 80, 80}, 64, 1, 1) == TensorShape{64, 80, 80});
    CHECK(catalog::conv_output_shape({512, 20, 20}, 256, 3, 1) == TensorShape{256, 20, 20});
    // odd extents follow the ceil rule
    CHECK(catalog::conv_output_shape({3, 7, 7}, 8, 3, 2).height == 4);
}

TEST_CASE("Conv stats: conv + folded batch norm, 2 FLOPs per MAC") {
    catalog::ModuleStats stats =
        catalog::module_stats(ModuleKind::Conv, args({16, 3, 2}), {{3, 640, 640}});
    CHECK(stats.params == 464); // 3*16*9 + 2*16
    CHECK(stats.flops == 88'473'600);
    CHECK(stats.out() == TensorShape{16, 320, 320});
}

TEST_CASE("Concat sums channels at zero cost") {
    catalog::ModuleStats stats =
        catalog::module_stats(ModuleKind::Concat, args({1}), {{64, 40, 40}, {64, 40, 40}});
    CHECK(stats.params == 0);
    CHECK(stats.flops == 0);
    CHECK(stats.out() == TensorShape{128, 40, 40});
}

TEST_CASE("Concat extent mismatch raises ChannelMismatch") {
    CHECK_THROWS_WITH_AS(
        catalog::module_stats(ModuleKind::Concat, args({1}), {{64, 40, 40}, {64, 20, 20}}),
        doctest::Contains("ChannelMismatch"), Error);
}

TEST_CASE("Concat arity") {
    CHECK_THROWS_WITH_AS(catalog::module_stats(ModuleKind::Concat, args({1}), {{64, 40, 40}}),
                         doctest::Contains("ArityMismatch"), Error);
}

TEST_CASE("Upsample doubles extents for free") {
    std::vector<Arg> upsample_args{Arg(std::monostate{}), Arg(std::int64_t{2}),
                                   Arg(std::string("nearest"))};
    catalog::ModuleStats stats =
        catalog::module_stats(ModuleKind::Upsample, upsample_args, {{256, 20, 20}});
    CHECK(stats.params == 0);
    CHECK(stats.flops == 0);
    CHECK(stats.out() == TensorShape{256, 40, 40});
}

TEST_CASE("ghost module arithmetic") {
    SUBCASE("hand-counted example at 16 -> 32") {
        catalog::ModuleStats stats = catalog::ghost_module_stats(16, 32, 3, 5, 2, {16, 40, 40});
        // primary 16*9*16 = 2304, cheap 16*25 = 400, batch norms 2*16 + 2*16
        CHECK(stats.params == 2304 + 400 + 64);
        CHECK(stats.flops == 2 * (2304 + 400) * 40 * 40);
        CHECK(stats.out() == TensorShape{32, 40, 40});
        // beats the plain convolution with the same output width
        catalog::ModuleStats plain =
            catalog::module_stats(ModuleKind::Conv, args({32, 3, 1}), {{16, 40, 40}});
        CHECK(stats.params < plain.params);
    }
    SUBCASE("smallest legal ghost module") {
        catalog::ModuleStats stats = catalog::ghost_module_stats(1, 2, 1, 1, 2, {1, 8, 8});
        CHECK(stats.params == 6); // 1 + 2 + 1 + 2
    }
    SUBCASE("indivisible channels") {
        CHECK_THROWS_WITH_AS(catalog::ghost_module_stats(16, 33, 3, 5, 2, {16, 40, 40}),
                             doctest::Contains("IndivisibleChannels"), Error);
    }
    SUBCASE("ghost saving holds across a small grid") {
        for (std::int64_t c_in : {8, 16, 32, 64}) {
            for (std::int64_t n_out : {16, 32, 64}) {
                catalog::ModuleStats ghost =
                    catalog::ghost_module_stats(c_in, n_out, 3, 5, 2, {c_in, 20, 20});
                catalog::ModuleStats plain = catalog::module_stats(
                    ModuleKind::Conv, args({n_out, 3, 1}), {{c_in, 20, 20}});
                CAPTURE(c_in);
                CAPTURE(n_out);
                CHECK(ghost.params < plain.params);
            }
        }
    }
}

TEST_CASE("GhostConv divisibility propagates") {
    CHECK_THROWS_WITH_AS(
        catalog::module_stats(ModuleKind::GhostConv, args({33, 3, 2}), {{16, 40, 40}}),
        doctest::Contains("IndivisibleChannels"), Error);
}

TEST_CASE("backbone templates") {
    SUBCASE("resnet18 taps") {
        const catalog::BackboneTemplate& tpl = catalog::backbone_template("resnet18");
        REQUIRE(tpl.taps.size() == 3);
        const catalog::BackboneTap* p3 = tpl.find_tap(6);
        const catalog::BackboneTap* p4 = tpl.find_tap(7);
        const catalog::BackboneTap* p5 = tpl.find_tap(8);
        REQUIRE(p3 != nullptr);
        REQUIRE(p4 != nullptr);
        REQUIRE(p5 != nullptr);
        CHECK(p3->channels == 128);
        CHECK(p3->total_stride == 8);
        CHECK(p4->channels == 256);
        CHECK(p4->total_stride == 16);
        CHECK(p5->channels == 512);
        CHECK(p5->total_stride == 32);
    }
    SUBCASE("vgg16 has 13 convolutions and 5 pools") {
        const catalog::BackboneTemplate& tpl = catalog::backbone_template("vgg16");
        int convs = 0;
        int pools = 0;
        for (const auto& stage : tpl.stages) {
            if (stage.block == "conv3x3_bias") convs += stage.repeats;
            if (stage.block == "maxpool2x2") pools += stage.repeats;
        }
        CHECK(convs == 13);
        CHECK(pools == 5);
        CHECK(tpl.find_tap(30)->channels == 512);
        CHECK(tpl.find_tap(30)->total_stride == 16);
        CHECK(tpl.find_tap(31)->channels == 512);
        CHECK(tpl.find_tap(31)->total_stride == 32);
    }
    SUBCASE("efficientnetv2_s deepest tap is 256 channels at stride 32") {
        const catalog::BackboneTemplate& tpl = catalog::backbone_template("efficientnetv2_s");
        CHECK(tpl.find_tap(8)->channels == 256);
        CHECK(tpl.find_tap(8)->total_stride == 32);
    }
    SUBCASE("stride bookkeeping yields exactly 8/16/32") {
        for (const char* name : {"resnet18", "vgg16", "efficientnetv2_s"}) {
            CAPTURE(name);
            const catalog::BackboneTemplate& tpl = catalog::backbone_template(name);
            REQUIRE(tpl.taps.size() == 3);
            CHECK(tpl.taps[0].total_stride == 8);
            CHECK(tpl.taps[1].total_stride == 16);
            CHECK(tpl.taps[2].total_stride == 32);
        }
    }
    SUBCASE("unknown backbone") {
        CHECK_THROWS_WITH_AS(catalog::backbone_template("resnet50"),
                             doctest::Contains("UnknownBackbone"), Error);
    }
}

// Frozen totals, hand-summed from the published stage tables: per-block
// conv/bn/bias counts accumulated stage by stage.
TEST_CASE("template parameter totals match the published architectures") {
    TensorShape image{3, 640, 640};
    CHECK(catalog::template_full_stats(catalog::backbone_template("resnet18"), image).params ==
          11'176'512);
    CHECK(catalog::template_full_stats(catalog::backbone_template("vgg16"), image).params ==
          14'714'688);
    CHECK(catalog::template_full_stats(catalog::backbone_template("efficientnetv2_s"), image)
              .params == 19'847'248);
}

TEST_CASE("template_stats walks up to the tap") {
    TensorShape image{3, 640, 640};
    SUBCASE("resnet18 tap 8 lands at 512 x 20 x 20") {
        catalog::ModuleStats stats =
            catalog::template_stats(catalog::backbone_template("resnet18"), 8, image);
        CHECK(stats.out() == TensorShape{512, 20, 20});
        CHECK(stats.params == 11'176'512); // deepest tap covers the whole trunk
    }
    SUBCASE("vgg16 /8 tap has 80 x 80 extent") {
        catalog::ModuleStats stats =
            catalog::template_stats(catalog::backbone_template("vgg16"), 23, image);
        CHECK(stats.out().height == 80);
        CHECK(stats.out().width == 80);
        CHECK(stats.out().channels == 512);
    }
    SUBCASE("efficientnetv2_s /32 tap has 256 channels") {
        catalog::ModuleStats stats =
            catalog::template_stats(catalog::backbone_template("efficientnetv2_s"), 8, image);
        CHECK(stats.out() == TensorShape{256, 20, 20});
    }
    SUBCASE("resnet18 partial walk is strictly smaller") {
        catalog::ModuleStats p3 =
            catalog::template_stats(catalog::backbone_template("resnet18"), 6, image);
        CHECK(p3.out() == TensorShape{128, 80, 80});
        CHECK(p3.params < 11'176'512);
    }
    SUBCASE("unknown tap") {
        CHECK_THROWS_WITH_AS(
            catalog::template_stats(catalog::backbone_template("resnet18"), 99, image),
            doctest::Contains("UnknownTap"), Error);
    }
}

TEST_CASE("zero-cost modules stay zero-cost on random shapes") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<std::int64_t> channels(1, 256);
    std::uniform_int_distribution<std::int64_t> extent(1, 128);
    for (int trial = 0; trial < 100; ++trial) {
        TensorShape a{channels(rng), extent(rng), extent(rng)};
        TensorShape b{channels(rng), a.height, a.width};
        catalog::ModuleStats concat =
            catalog::module_stats(ModuleKind::Concat, args({1}), {a, b});
        CHECK(concat.params == 0);
        CHECK(concat.flops == 0);
        std::vector<Arg> upsample_args{Arg(std::int64_t{2}), Arg(std::string("nearest"))};
        catalog::ModuleStats upsample =
            catalog::module_stats(ModuleKind::Upsample, upsample_args, {a});
        CHECK(upsample.params == 0);
        CHECK(upsample.flops == 0);
    }
}

TEST_CASE("module_stats is pure") {
    catalog::ModuleStats first =
        catalog::module_stats(ModuleKind::C2f, args({64}), {{64, 80, 80}}, 2);
    catalog::ModuleStats second =
        catalog::module_stats(ModuleKind::C2f, args({64}), {{64, 80, 80}}, 2);
    CHECK(first.params == second.params);
    CHECK(first.flops == second.flops);
    CHECK(first.out() == second.out());
}

TEST_CASE("C2f matches the hand expansion") {
    // C2f(32 -> 32, n=1): cv1 32*32+64, two 3x3 convs on 16 channels, cv2 48*32+64.
    catalog::ModuleStats stats =
        catalog::module_stats(ModuleKind::C2f, args({32}), {{32, 160, 160}}, 1);
    CHECK(stats.params == 1088 + 1600 + 2 * 2336);
}

TEST_CASE("SPPF matches the hand expansion") {
    // SPPF(256 -> 256): cv1 256->128, cv2 512->256.
    catalog::ModuleStats stats =
        catalog::module_stats(ModuleKind::SPPF, args({256, 5}), {{256, 20, 20}});
    CHECK(stats.params == 33'024 + 131'584);
    CHECK(stats.out() == TensorShape{256, 20, 20});
}

TEST_CASE("Detect widths follow the first input") {
    // ch0 = 64, nc = 2: box width 64, class width 64, DFL 16.
    catalog::ModuleStats stats = catalog::module_stats(
        ModuleKind::Detect, args({2}), {{64, 80, 80}, {128, 40, 40}, {256, 20, 20}});
    CHECK(stats.params == 751'702);
    CHECK(stats.out_shapes.size() == 3);
}
