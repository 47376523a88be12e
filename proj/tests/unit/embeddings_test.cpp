#include "cbd/embeddings.hpp"
#include "cbd/error.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace cbd;

namespace {

const std::string kGlove = std::string(CBD_DATA_DIR) + "/fixtures/glove_tiny.100d.txt";

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

Vocabulary vocab_of(std::vector<std::string> tokens) { return Vocabulary(std::move(tokens), 1000, 8); }

}  // namespace

TEST(LoadGlove, ReadsFixture) {
    const auto g = load_glove(kGlove, 100);
    EXPECT_EQ(g.vectors.size(), 10u);
    ASSERT_TRUE(g.vectors.count("the"));
    EXPECT_EQ(g.vectors.at("the").size(), 100u);
    EXPECT_EQ(g.skipped_lines, 0u);
}

TEST(LoadGlove, SkipsDimensionMismatchAndGarbage) {
    std::string content = "ok";
    for (int i = 0; i < 4; ++i) content += " 0.5";
    content += "\nshort 1 2\nbad 1 x 3 4\ngood 1 2 3 4\n";
    const auto g = load_glove(write_temp("cbd_glove_mixed.txt", content), 4);
    EXPECT_EQ(g.vectors.size(), 2u);
    EXPECT_EQ(g.skipped_lines, 2u);
    EXPECT_EQ(g.vectors.at("good"), (std::vector<double>{1, 2, 3, 4}));
}

TEST(LoadGlove, EmptyOrMissingFileIsAnError) {
    try {
        load_glove(write_temp("cbd_glove_empty.txt", ""), 100);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("no embeddings loaded"), std::string::npos);
    }
    EXPECT_THROW(load_glove("/nonexistent/glove.txt", 100), DataError);
}

TEST(BuildMatrix, CopiesPretrainedRowsExactly) {
    const auto g = load_glove(kGlove, 100);
    const auto v = vocab_of({"the", "zzzmissing"});
    const auto m = build_matrix(v, &g, 100, 7);
    ASSERT_EQ(m.rows.rows(), 4);
    ASSERT_EQ(m.rows.cols(), 100);
    for (int c = 0; c < 100; ++c) EXPECT_EQ(m.rows(2, c), g.vectors.at("the")[static_cast<std::size_t>(c)]);
    EXPECT_TRUE(m.rows.row(0).isZero(0.0));
    EXPECT_DOUBLE_EQ(m.hit_rate, 0.5);
    EXPECT_EQ(m.oov_initialized, 2u);  // OOV row + the missing token
}

TEST(BuildMatrix, RandomRowsStayInRange) {
    const auto g = load_glove(kGlove, 100);
    const auto v = vocab_of({"nothere", "norhere", "you"});
    const auto m = build_matrix(v, &g, 100, 1);
    for (int r : {1, 2, 3}) {
        EXPECT_LE(m.rows.row(r).maxCoeff(), kEmbeddingInitRange);
        EXPECT_GE(m.rows.row(r).minCoeff(), -kEmbeddingInitRange);
        EXPECT_GT(m.rows.row(r).cwiseAbs().sum(), 0.0);
    }
    EXPECT_NEAR(m.hit_rate, 1.0 / 3.0, 1e-15);
    EXPECT_TRUE(m.rows.allFinite());
}

TEST(BuildMatrix, CustomModelHasNoPretrainedRows) {
    const auto m = build_matrix(vocab_of({"the", "you"}), nullptr, 100, 3);
    EXPECT_EQ(m.hit_rate, 0.0);
    EXPECT_EQ(m.oov_initialized, 3u);
    EXPECT_TRUE(m.rows.row(0).isZero(0.0));
}

TEST(BuildMatrix, DeterministicUnderSeed) {
    const auto v = vocab_of({"a", "b", "c"});
    const auto a = build_matrix(v, nullptr, 16, 99);
    const auto b = build_matrix(v, nullptr, 16, 99);
    EXPECT_EQ(0, std::memcmp(a.rows.data(), b.rows.data(), sizeof(double) * static_cast<std::size_t>(a.rows.size())));
    const auto c = build_matrix(v, nullptr, 16, 100);
    EXPECT_FALSE(a.rows.isApprox(c.rows));
}

TEST(BuildMatrix, DimensionMismatchWithGlove) {
    const auto g = load_glove(kGlove, 100);
    EXPECT_THROW(build_matrix(vocab_of({"a"}), &g, 50, 0), ConfigError);
}
