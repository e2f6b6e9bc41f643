#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "tcm/datagen.hpp"
#include "tcm/error.hpp"
#include "tcm/geometry.hpp"
#include "tcm/rng.hpp"
#include "test_support.hpp"

using namespace tcm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tcm_datagen_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::vector<double> class_mean(const EmbeddingDataset& ds, int cls) {
    std::vector<double> mean(ds.dim(), 0.0);
    int count = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.labels[i] != cls) continue;
        ++count;
        for (std::size_t j = 0; j < ds.dim(); ++j) mean[j] += ds.features(i, j);
    }
    for (auto& v : mean) v /= count;
    return mean;
}

}  // namespace

TEST_CASE("gaussian_mixture produces grouped balanced labels") {
    MixtureSpec spec;
    spec.class_count = 2;
    spec.samples_per_class = 3;
    spec.dim = 4;
    const auto ds = gaussian_mixture(spec);
    CHECK(ds.size() == 6);
    CHECK(ds.labels == std::vector<int>{0, 0, 0, 1, 1, 1});
    CHECK(ds.class_count == 2);
}

TEST_CASE("gaussian_mixture is deterministic per seed") {
    MixtureSpec spec;
    spec.class_count = 3;
    spec.samples_per_class = 10;
    spec.dim = 5;
    spec.seed = 9;
    const auto a = gaussian_mixture(spec);
    const auto b = gaussian_mixture(spec);
    CHECK(a.features.data() == b.features.data());

    spec.seed = 10;
    const auto c = gaussian_mixture(spec);
    CHECK(a.features.data() != c.features.data());
}

TEST_CASE("gaussian_mixture center distances scale linearly with separation") {
    MixtureSpec spec;
    spec.class_count = 3;
    spec.samples_per_class = 200;
    spec.dim = 4;
    spec.noise_sigma = 1e-3;  // points hug their centers
    spec.center_separation = 1.0;
    spec.seed = 4;
    const auto a = gaussian_mixture(spec);
    spec.center_separation = 2.0;
    const auto b = gaussian_mixture(spec);
    for (int c0 = 0; c0 < 3; ++c0) {
        for (int c1 = c0 + 1; c1 < 3; ++c1) {
            const auto m0a = class_mean(a, c0);
            const auto m1a = class_mean(a, c1);
            const auto m0b = class_mean(b, c0);
            const auto m1b = class_mean(b, c1);
            double da = 0.0, db = 0.0;
            for (std::size_t j = 0; j < m0a.size(); ++j) {
                da += (m0a[j] - m1a[j]) * (m0a[j] - m1a[j]);
                db += (m0b[j] - m1b[j]) * (m0b[j] - m1b[j]);
            }
            CHECK(std::sqrt(db) == doctest::Approx(2.0 * std::sqrt(da)).epsilon(0.01));
        }
    }
}

TEST_CASE("gaussian_mixture with zero separation collapses all centers") {
    MixtureSpec spec;
    spec.class_count = 2;
    spec.samples_per_class = 50;
    spec.dim = 3;
    spec.center_separation = 0.0;
    spec.noise_sigma = 0.01;
    const auto ds = gaussian_mixture(spec);
    for (const float v : ds.features.data()) CHECK(std::abs(v) < 0.1f);
}

TEST_CASE("gaussian_mixture rejects invalid specs") {
    MixtureSpec spec;
    spec.class_count = 2;
    spec.samples_per_class = 2;
    spec.dim = 2;
    spec.noise_sigma = 0.0;
    CHECK_THROWS_AS(gaussian_mixture(spec), Error);
    spec.noise_sigma = 1.0;
    spec.center_separation = -1.0;
    CHECK_THROWS_AS(gaussian_mixture(spec), Error);
    spec.center_separation = 1.0;
    spec.class_count = 1;
    CHECK_THROWS_AS(gaussian_mixture(spec), Error);
}

TEST_CASE("kmeans recovers well-separated mixture classes above 99%") {
    MixtureSpec spec;
    spec.class_count = 5;
    spec.samples_per_class = 100;
    spec.dim = 8;
    spec.center_separation = 10.0;
    spec.noise_sigma = 1.0;
    spec.seed = 12;
    const auto ds = gaussian_mixture(spec);
    const auto clusters = kmeans(ds.features, 5, 3);

    // Exhaustive permutation matching over the 5! label mappings.
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::size_t best = 0;
    do {
        std::size_t agree = 0;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (perm[static_cast<std::size_t>(clusters.assignment[i])] == ds.labels[i]) {
                ++agree;
            }
        }
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(static_cast<double>(best) / static_cast<double>(ds.size()) >= 0.99);
}

TEST_CASE("longtail_class_size follows the exponential decay formula") {
    // C=3, n=100, rho=10 -> (100, 32, 10); 100 * 10^(-1/2) = 31.62...
    CHECK(longtail_class_size(100, 10.0, 3, 0) == 100);
    CHECK(longtail_class_size(100, 10.0, 3, 1) == 32);
    CHECK(longtail_class_size(100, 10.0, 3, 2) == 10);
    // Two classes: the ratio itself.
    CHECK(longtail_class_size(100, 5.0, 2, 0) == 100);
    CHECK(longtail_class_size(100, 5.0, 2, 1) == 20);
}

TEST_CASE("longtail_subsample yields the exact class sizes") {
    MixtureSpec spec;
    spec.class_count = 3;
    spec.samples_per_class = 100;
    spec.dim = 2;
    const auto ds = gaussian_mixture(spec);

    LongTailSpec lt;
    lt.imbalance_ratio = 10.0;
    const auto out = longtail_subsample(ds, lt);
    const auto counts = class_counts(out);
    CHECK(counts == std::vector<int>{100, 32, 10});
    CHECK(out.size() == 142);
}

TEST_CASE("longtail_subsample with rho=1 keeps the dataset intact") {
    MixtureSpec spec;
    spec.class_count = 4;
    spec.samples_per_class = 25;
    spec.dim = 3;
    const auto ds = gaussian_mixture(spec);
    const auto out = longtail_subsample(ds, LongTailSpec{1.0, 7});
    CHECK(out.features.data() == ds.features.data());
    CHECK(out.labels == ds.labels);
}

TEST_CASE("longtail_subsample rejects invalid inputs") {
    MixtureSpec spec;
    spec.class_count = 2;
    spec.samples_per_class = 5;
    spec.dim = 1;
    const auto ds = gaussian_mixture(spec);
    CHECK_THROWS_AS(longtail_subsample(ds, LongTailSpec{6.0, 0}), Error);  // rho > n
    CHECK_THROWS_AS(longtail_subsample(ds, LongTailSpec{0.5, 0}), Error);  // rho < 1

    auto unbalanced = ds;
    unbalanced.labels.back() = 0;
    CHECK_THROWS_AS(longtail_subsample(unbalanced, LongTailSpec{2.0, 0}), Error);
}

TEST_CASE("save/load round-trips datasets bit-exactly") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        EmbeddingDataset ds;
        ds.class_count = 2 + static_cast<int>(rng.below(5));
        const std::size_t n = 1 + rng.below(40);
        const std::size_t d = 1 + rng.below(6);
        ds.features = test::random_points(n, d, rng, 3.0);
        for (std::size_t i = 0; i < n; ++i) {
            ds.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(ds.class_count))));
        }
        // class_count must stay >= 2 and cover max label; it does by construction.

        TempDir dir;
        save_embeddings(ds, dir.file("f.emb"), dir.file("l.lab"));
        const auto loaded = load_embeddings(dir.file("f.emb"), dir.file("l.lab"));
        CHECK(loaded.features.data() == ds.features.data());
        CHECK(loaded.features.rows() == ds.features.rows());
        CHECK(loaded.features.cols() == ds.features.cols());
        CHECK(loaded.labels == ds.labels);
        CHECK(loaded.class_count == ds.class_count);
    }
}

TEST_CASE("load_embeddings accepts CSV features and headerless labels") {
    TempDir dir;
    {
        std::ofstream f(dir.file("f.csv"));
        f << "1.5,2.5,3.5\n-1.0,0.25,0\n";
        std::ofstream l(dir.file("l.txt"));
        l << "0\n2\n";
    }
    const auto ds = load_embeddings(dir.file("f.csv"), dir.file("l.txt"));
    CHECK(ds.size() == 2);
    CHECK(ds.dim() == 3);
    CHECK(ds.class_count == 3);  // max label + 1
    CHECK(ds.features(0, 0) == doctest::Approx(1.5));
    CHECK(ds.features(1, 1) == doctest::Approx(0.25));
}

TEST_CASE("load_embeddings reports row numbers for mismatches") {
    TempDir dir;
    {
        std::ofstream f(dir.file("f.csv"));
        f << "1,2\n3,4\n";
        std::ofstream l(dir.file("l.txt"));
        l << "0\n1\n0\n";  // three labels vs two rows
    }
    try {
        load_embeddings(dir.file("f.csv"), dir.file("l.txt"));
        FAIL("expected a format error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Format);
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("load_embeddings rejects malformed content") {
    TempDir dir;

    // Ragged CSV row.
    {
        std::ofstream f(dir.file("ragged.csv"));
        f << "1,2\n3\n";
        std::ofstream l(dir.file("l.txt"));
        l << "0\n1\n";
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("ragged.csv"), dir.file("l.txt")), Error);

    // Unparsable float.
    {
        std::ofstream f(dir.file("bad.csv"));
        f << "1,x\n";
        std::ofstream l(dir.file("one.txt"));
        l << "0\n";
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("bad.csv"), dir.file("one.txt")), Error);

    // Truncated binary payload.
    {
        std::ofstream f(dir.file("trunc.emb"), std::ios::binary);
        f << "EMB v1 2 2\n";
        const float vals[2] = {1.0f, 2.0f};  // half the payload
        f.write(reinterpret_cast<const char*>(vals), sizeof(vals));
        std::ofstream l(dir.file("two.txt"));
        l << "0\n1\n";
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("trunc.emb"), dir.file("two.txt")), Error);

    // Bad EMB header.
    {
        std::ofstream f(dir.file("badhdr.emb"), std::ios::binary);
        f << "EMB v1 0 2\n";
        std::ofstream l(dir.file("zero.txt"));
        l << "0\n";
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("badhdr.emb"), dir.file("zero.txt")), Error);

    // Blank line inside the label list.
    {
        std::ofstream f(dir.file("ok.csv"));
        f << "1\n2\n";
        std::ofstream l(dir.file("blank.txt"));
        l << "0\n\n1\n";
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("ok.csv"), dir.file("blank.txt")), Error);

    // Non-finite value in CSV.
    {
        std::ofstream f(dir.file("inf.csv"));
        f << "inf\n";
        std::ofstream l(dir.file("one2.txt"));
        l << "0\n";
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("inf.csv"), dir.file("one2.txt")), Error);
}

TEST_CASE("LAB header declares the class count explicitly") {
    TempDir dir;
    {
        std::ofstream f(dir.file("f.csv"));
        f << "1\n2\n";
        std::ofstream l(dir.file("l.lab"));
        l << "LAB v1 2 5\n0\n1\n";
    }
    const auto ds = load_embeddings(dir.file("f.csv"), dir.file("l.lab"));
    CHECK(ds.class_count == 5);

    {
        std::ofstream l(dir.file("bad.lab"));
        l << "LAB v1 3 5\n0\n1\n";  // declared N mismatch
    }
    CHECK_THROWS_AS(load_embeddings(dir.file("f.csv"), dir.file("bad.lab")), Error);
}
