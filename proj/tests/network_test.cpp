#include <chesscv/layers.hpp>
#include <chesscv/network.hpp>
#include <chesscv/train.hpp>

#include <gtest/gtest.h>

#include <random>

#include "gradcheck.hpp"

using namespace chesscv;

namespace {

// Tiny but architecturally faithful stand-in for the production models.
Network tiny_net(int classes = 3, std::uint64_t seed = 5) {
    return build_cnn(3, 12, 12, classes, seed);
}

// Deterministic toy dataset: class = brightest channel.
Dataset channel_dataset(int n, std::uint64_t seed) {
    Dataset d;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(0.0, 0.25);
    std::uniform_int_distribution<int> cls(0, 2);
    for (int i = 0; i < n; ++i) {
        const int label = cls(rng);
        Image img(12, 12, 3);
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < 12; ++y)
                for (int x = 0; x < 12; ++x)
                    img.at(x, y, c) = (c == label ? 0.75 : 0.0) + noise(rng);
        d.append(img, label);
    }
    return d;
}

bool same_values(const Tensor& a, const Tensor& b) {
    if (a.shape != b.shape) return false;
    for (std::size_t i = 0; i < a.v.size(); ++i)
        if (a.v[i] != b.v[i]) return false;
    return true;
}

}  // namespace

TEST(Network, ProductionSpecsHaveExpectedShape) {
    const Network occ = build_occupancy_net();
    const Network piece = build_piece_net();
    EXPECT_EQ(occ.class_count, 2);
    EXPECT_EQ(piece.class_count, 12);
    // conv/relu/pool x3, flatten, dense/relu, dense/relu, dense, softmax
    EXPECT_EQ(occ.layers.size(), 16u);
    EXPECT_EQ(piece.layers.size(), 16u);
    // final dense widths
    const auto occ_specs = occ.specs();
    EXPECT_EQ(occ_specs[occ.head_layer_index()].b, 2);
    const auto piece_specs = piece.specs();
    EXPECT_EQ(piece_specs[piece.head_layer_index()].b, 12);
    // forward shapes at batch 2
    const Tensor occ_out = occ.forward(gradcheck::random_tensor({2, 3, 100, 100}, 3, 0.0, 1.0));
    EXPECT_EQ(occ_out.shape, (std::vector<int>{2, 2}));
    const Tensor piece_out =
        piece.forward(gradcheck::random_tensor({2, 3, 150, 100}, 4, 0.0, 1.0));
    EXPECT_EQ(piece_out.shape, (std::vector<int>{2, 12}));
}

TEST(Network, SameSeedSameWeightsDifferentSeedDifferent) {
    const Network a = tiny_net(3, 42);
    const Network b = tiny_net(3, 42);
    const Network c = tiny_net(3, 43);
    auto pa = const_cast<Network&>(a).params();
    auto pb = const_cast<Network&>(b).params();
    auto pc = const_cast<Network&>(c).params();
    ASSERT_EQ(pa.size(), pb.size());
    bool all_equal_ab = true, all_equal_ac = true;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (!same_values(*pa[i], *pb[i])) all_equal_ab = false;
        if (!same_values(*pa[i], *pc[i])) all_equal_ac = false;
    }
    EXPECT_TRUE(all_equal_ab);
    EXPECT_FALSE(all_equal_ac);
}

TEST(Network, CopyIsDeepAndIndependent) {
    Network a = tiny_net();
    Network b = a;  // deep copy
    const Tensor x = gradcheck::random_tensor({1, 3, 12, 12}, 9, 0.0, 1.0);
    const Tensor ya = a.forward(x);
    const Tensor yb = b.forward(x);
    EXPECT_TRUE(same_values(ya, yb));
    // mutate the copy; the original must not move
    for (Tensor* p : b.params())
        for (double& v : p->v) v += 0.1;
    const Tensor ya2 = a.forward(x);
    EXPECT_TRUE(same_values(ya, ya2));
    EXPECT_FALSE(same_values(ya, b.forward(x)));
}

TEST(Network, ForwardIsDeterministicAndBatchConsistent) {
    const Network net = tiny_net();
    const Tensor x = gradcheck::random_tensor({3, 3, 12, 12}, 13, 0.0, 1.0);
    const Tensor y1 = net.forward(x);
    const Tensor y2 = net.forward(x);
    EXPECT_TRUE(same_values(y1, y2));
    // each sample forwarded alone gives the same row as the batch
    for (int s = 0; s < 3; ++s) {
        Tensor one({1, 3, 12, 12});
        std::copy(x.v.begin() + s * one.numel(), x.v.begin() + (s + 1) * one.numel(),
                  one.v.begin());
        const Tensor ys = net.forward(one);
        for (int k = 0; k < y1.dim(1); ++k)
            EXPECT_NEAR(ys.v[k], y1.v[s * y1.dim(1) + k], 1e-9);
    }
}

TEST(Train, LearnsSeparableToyProblem) {
    Network net = tiny_net(3, 77);
    const Dataset data = channel_dataset(120, 5);
    TrainRegimen reg;
    reg.stages = {{false, 1e-3, 8}};
    reg.batch_size = 16;
    const auto trace = train(net, data, reg);
    EXPECT_FALSE(trace.empty());
    EXPECT_GE(accuracy(net, data), 0.99);
}

TEST(Train, MicroBatchingReproducesWholeBatchGradients) {
    // Identical seed and stages; only the accumulation chunk size differs.
    // Losses and final weights must match to rounding noise.
    const Dataset data = channel_dataset(64, 6);
    TrainRegimen whole;
    whole.stages = {{false, 1e-3, 2}};
    whole.batch_size = 32;
    whole.micro_batch = 32;
    TrainRegimen chunked = whole;
    chunked.micro_batch = 5;  // uneven split of 32 on purpose

    Network a = tiny_net(3, 21);
    Network b = a;
    const auto ta = train(a, data, whole);
    const auto tb = train(b, data, chunked);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_NEAR(ta[i], tb[i], 1e-9);
    auto pa = a.params();
    auto pb = b.params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        ASSERT_EQ(pa[i]->v.size(), pb[i]->v.size());
        for (std::size_t j = 0; j < pa[i]->v.size(); ++j)
            EXPECT_NEAR(pa[i]->v[j], pb[i]->v[j], 1e-9);
    }
}

TEST(Train, SameSeedBitwiseReproducible) {
    const Dataset data = channel_dataset(48, 7);
    TrainRegimen reg;
    reg.stages = {{false, 1e-3, 2}};
    reg.batch_size = 16;
    reg.seed = 99;
    Network a = tiny_net(3, 31);
    Network b = tiny_net(3, 31);
    const auto ta = train(a, data, reg);
    const auto tb = train(b, data, reg);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) EXPECT_EQ(ta[i], tb[i]);
    auto pa = a.params();
    auto pb = b.params();
    for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(same_values(*pa[i], *pb[i]));
}

TEST(Train, HeadOnlyStageLeavesLowerLayersBitwiseUnchanged) {
    const Dataset data = channel_dataset(48, 8);
    Network net = tiny_net(3, 41);
    const Network before = net;
    TrainRegimen reg;
    reg.stages = {{true, 1e-3, 2}};
    reg.batch_size = 16;
    train(net, data, reg);
    const std::size_t head = net.head_layer_index();
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto now = net.layers[i]->const_params();
        const auto old = before.layers[i]->const_params();
        for (std::size_t t = 0; t < now.size(); ++t) {
            const bool equal = now[t]->v == old[t]->v;
            if (i < head)
                EXPECT_TRUE(equal) << "layer " << i << " moved during head-only stage";
            else
                EXPECT_FALSE(equal) << "head layer " << i << " did not move";
        }
    }
}

TEST(Train, AugmentationHookReceivesSamplesAndAltersTraining) {
    const Dataset data = channel_dataset(48, 9);
    TrainRegimen reg;
    reg.stages = {{false, 1e-3, 1}};
    reg.batch_size = 16;
    int calls = 0;
    AugmentFn count_only = [&calls](const Image& img, std::mt19937_64&) {
        ++calls;
        return img;
    };
    Network a = tiny_net(3, 51);
    const auto ta = train(a, data, reg, count_only);
    EXPECT_EQ(calls, 48);
    // a destructive augmenter must change the loss trace
    AugmentFn blank = [](const Image& img, std::mt19937_64&) {
        Image out = img;
        for (double& v : out.data) v = 0.0;
        return out;
    };
    Network b = tiny_net(3, 51);
    const auto tb = train(b, data, reg, blank);
    EXPECT_NE(ta, tb);
}

TEST(Train, ValidatesArguments) {
    Network net = tiny_net();
    Dataset empty;
    TrainRegimen reg;
    reg.stages = {{false, 1e-3, 1}};
    EXPECT_THROW(train(net, empty, reg), std::invalid_argument);
    const Dataset data = channel_dataset(4, 10);
    TrainRegimen none;
    EXPECT_THROW(train(net, data, none), std::invalid_argument);
    TrainRegimen bad = reg;
    bad.batch_size = 0;
    EXPECT_THROW(train(net, data, bad), std::invalid_argument);
    bad = reg;
    bad.micro_batch = 0;
    EXPECT_THROW(train(net, data, bad), std::invalid_argument);
}

TEST(Dataset, AppendStoresImagesRecoverably) {
    Dataset d;
    const Image img = [] {
        Image im(5, 4, 3);
        for (std::size_t i = 0; i < im.data.size(); ++i)
            im.data[i] = static_cast<double>(i) / im.data.size();
        return im;
    }();
    d.append(img, 7);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d.labels[0], 7);
    const Image back = d.image(0);
    ASSERT_EQ(back.width, 5);
    ASSERT_EQ(back.height, 4);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 5; ++x)
                EXPECT_NEAR(back.at(x, y, c), img.at(x, y, c), 1e-6);  // float32 storage
    Image other(6, 4, 3);
    EXPECT_THROW(d.append(other, 0), std::invalid_argument);
}

TEST(Classify, ReturnsArgmaxWithConfidence) {
    const Network net = tiny_net(3, 61);
    Image img(12, 12, 3);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 12; ++x) img.at(x, y, 1) = 0.9;
    const Prediction p = classify(net, img);
    EXPECT_GE(p.label, 0);
    EXPECT_LT(p.label, 3);
    EXPECT_GT(p.confidence, 1.0 / 3 - 1e-9);
    EXPECT_LE(p.confidence, 1.0);
}
