#include <chesscv/imageio.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace chesscv;
namespace fs = std::filesystem;

namespace {

class ImageIo : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("imageio_test_" + std::to_string(counter_++));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
    static int counter_;
};
int ImageIo::counter_ = 0;

Image quantised_random_rgb(int w, int h, std::uint64_t seed) {
    Image img(w, h, 3);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(0, 255);
    for (double& v : img.data) v = d(rng) / 255.0;
    return img;
}

}  // namespace

TEST_F(ImageIo, PngRoundTripIsExactAtEightBit) {
    const Image img = quantised_random_rgb(37, 23, 5);
    save_png(img, path("rt.png"));
    const Image back = load_png(path("rt.png"));
    ASSERT_EQ(back.width, img.width);
    ASSERT_EQ(back.height, img.height);
    ASSERT_EQ(back.channels, 3);
    // values sit exactly on the 8-bit lattice, so the trip is lossless
    for (std::size_t i = 0; i < img.data.size(); ++i)
        ASSERT_NEAR(back.data[i], img.data[i], 0.5 / 255.0) << i;
}

TEST_F(ImageIo, GrayscaleSavesAsReplicatedRgb) {
    Image gray(8, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) gray.at(x, y) = (x + y) % 2 ? 1.0 : 0.0;
    save_png(gray, path("gray.png"));
    const Image back = load_png(path("gray.png"));
    ASSERT_EQ(back.channels, 3);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x)
            for (int c = 0; c < 3; ++c) ASSERT_NEAR(back.at(x, y, c), gray.at(x, y), 1e-9);
}

TEST_F(ImageIo, SavePngClampsOutOfRangeValues) {
    Image img(2, 1, 1);
    img.at(0, 0) = -3.0;
    img.at(1, 0) = 7.0;
    save_png(img, path("clamp.png"));
    const Image back = load_png(path("clamp.png"));
    EXPECT_DOUBLE_EQ(back.at(0, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(back.at(1, 0, 0), 1.0);
}

TEST_F(ImageIo, LoadImageDispatchesOnMagicBytes) {
    const Image img = quantised_random_rgb(16, 16, 9);
    save_png(img, path("magic.dat"));  // extension is irrelevant
    const Image back = load_image(path("magic.dat"));
    EXPECT_EQ(back.width, 16);

    std::ofstream junk(path("junk.png"), std::ios::binary);
    junk << "this is not an image at all";
    junk.close();
    EXPECT_THROW(load_image(path("junk.png")), std::runtime_error);
    EXPECT_THROW(load_image(path("does_not_exist.png")), std::runtime_error);

    std::ofstream tiny(path("tiny.png"), std::ios::binary);
    tiny << "ab";
    tiny.close();
    EXPECT_THROW(load_image(path("tiny.png")), std::runtime_error);
}

TEST_F(ImageIo, CorruptPngIsRejected) {
    const Image img = quantised_random_rgb(24, 24, 11);
    save_png(img, path("ok.png"));
    // truncate the file halfway
    std::ifstream in(path("ok.png"), std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path("trunc.png"), std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    EXPECT_THROW(load_png(path("trunc.png")), std::runtime_error);
}

TEST_F(ImageIo, SaveValidatesShape) {
    EXPECT_THROW(save_png(Image(), path("bad.png")), std::invalid_argument);
}
