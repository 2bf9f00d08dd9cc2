#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fsel/distance.hpp"
#include "fsel/fileio.hpp"
#include "fsel/parallel.hpp"
#include "fsel/rng.hpp"
#include "helpers.hpp"

using fsel::Index;
using fsel::Matrix;

namespace {

// Independent restatement of the documented mixing rule: the stream-th output
// of a SplitMix64 sequence started at the seed.
std::uint64_t splitmix_reference(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  std::uint64_t out = 0;
  for (std::uint64_t i = 0; i <= stream; ++i) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    out = z ^ (z >> 31);
  }
  return out;
}

}  // namespace

TEST_CASE("mix_seed matches the documented SplitMix64 sequence") {
  const std::uint64_t seeds[] = {0, 1, 42, 0xFFFFFFFFFFFFFFFFULL,
                                 0x123456789ABCDEF0ULL};
  for (const std::uint64_t seed : seeds)
    for (std::uint64_t stream = 0; stream < 12; ++stream)
      CHECK(fsel::mix_seed(seed, stream) == splitmix_reference(seed, stream));
}

TEST_CASE("mix_seed separates streams and seeds") {
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = a + 1; b < 20; ++b) {
      CHECK(fsel::mix_seed(7, a) != fsel::mix_seed(7, b));
      CHECK(fsel::mix_seed(a, 3) != fsel::mix_seed(b, 3));
    }
}

TEST_CASE("Rng is deterministic per seed") {
  fsel::Rng a(123), b(123), c(124);
  bool all_equal = true;
  bool any_diff_seed_mismatch = false;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff_seed_mismatch = any_diff_seed_mismatch || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff_seed_mismatch);
}

TEST_CASE("next_double stays in [0,1) and is roughly uniform") {
  fsel::Rng rng(5);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_double();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.02);
}

TEST_CASE("next_index is bounded and unbiased across buckets") {
  fsel::Rng rng(9);
  const std::uint64_t bound = 7;
  const int draws = 70000;
  std::vector<int> buckets(bound, 0);
  for (int i = 0; i < draws; ++i) {
    const std::uint64_t v = rng.next_index(bound);
    REQUIRE(v < bound);
    ++buckets[static_cast<std::size_t>(v)];
  }
  for (const int count : buckets) CHECK(std::abs(count - 10000) < 500);
  fsel::Rng one(1);
  for (int i = 0; i < 100; ++i) CHECK(one.next_index(1) == 0);
}

TEST_CASE("next_gaussian has unit-normal moments") {
  fsel::Rng rng(11);
  const int n = 40000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.next_gaussian();
    REQUIRE(std::isfinite(x));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("parallel_for covers the range once at any thread cap") {
  const Index n = 10001;
  for (const int threads : {1, 2, 8}) {
    fsel::set_max_threads(threads);
    std::vector<std::int64_t> hits(static_cast<std::size_t>(n), 0);
    std::atomic<int> calls{0};
    fsel::parallel_for(0, n, [&](Index i) {
      ++hits[static_cast<std::size_t>(i)];
      calls.fetch_add(1, std::memory_order_relaxed);
    });
    CHECK(calls.load() == n);
    bool all_once = true;
    for (const auto h : hits) all_once = all_once && h == 1;
    CHECK(all_once);
  }
  fsel::set_max_threads(0);
}

TEST_CASE("parallel_for result is independent of thread count") {
  const Index n = 50000;
  std::vector<double> one(static_cast<std::size_t>(n));
  std::vector<double> eight(static_cast<std::size_t>(n));
  fsel::set_max_threads(1);
  fsel::parallel_for(0, n, [&](Index i) {
    one[static_cast<std::size_t>(i)] = std::sin(static_cast<double>(i));
  });
  fsel::set_max_threads(8);
  fsel::parallel_for(0, n, [&](Index i) {
    eight[static_cast<std::size_t>(i)] = std::sin(static_cast<double>(i));
  });
  fsel::set_max_threads(0);
  CHECK(one == eight);
}

TEST_CASE("parallel_for ignores empty ranges") {
  int calls = 0;
  fsel::parallel_for(5, 5, [&](Index) { ++calls; });
  fsel::parallel_for(5, 3, [&](Index) { ++calls; });
  CHECK(calls == 0);
}

TEST_CASE("thread cap accessors") {
  fsel::set_max_threads(3);
  CHECK(fsel::max_threads() == 3);
  fsel::set_max_threads(0);
  CHECK(fsel::max_threads() >= 1);
}

TEST_CASE("file round-trip preserves arbitrary bytes") {
  testutil::TempDir dir;
  std::string payload = "line\n";
  payload.push_back('\0');
  payload += "\xFF\xFE binary tail";
  const auto path = dir.file("blob.bin");
  fsel::write_file_atomic(path, payload);
  CHECK(fsel::read_file(path) == payload);
  // Overwrite must fully replace, and no temp file may survive.
  fsel::write_file_atomic(path, "short");
  CHECK(fsel::read_file(path) == "short");
  int entries = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    (void)entry;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("read_file reports the missing path") {
  testutil::TempDir dir;
  const auto path = dir.file("absent.txt");
  try {
    fsel::read_file(path);
    FAIL("expected read_file to throw");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(path.filename().string()) !=
          std::string::npos);
  }
}

TEST_CASE("squared_distance matches a coordinate loop") {
  const Matrix m = testutil::random_matrix(20, 6, 77);
  for (Index a = 0; a < m.rows(); ++a)
    for (Index b = 0; b < m.rows(); ++b) {
      double expect = 0.0;
      for (Index j = 0; j < m.cols(); ++j) {
        const double diff = m(a, j) - m(b, j);
        expect += diff * diff;
      }
      CHECK(fsel::squared_distance(m.row(a), m.row(b)) ==
            doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("nearest_row picks the minimum and breaks ties low") {
  Matrix rows(4, 2);
  rows << 0, 0, 3, 4, 0, 0, 1, 1;  // rows 0 and 2 are identical
  Matrix probe(1, 2);
  probe << 0.1, 0.1;
  double sq = -1.0;
  CHECK(fsel::nearest_row(probe.row(0), rows, &sq) == 0);
  CHECK(sq == doctest::Approx(0.02));
  // Equidistant pair (rows 0 and 2): the lower index must win.
  Matrix mid(1, 2);
  mid << 0.0, 0.0;
  CHECK(fsel::nearest_row(mid.row(0), rows) == 0);
}

TEST_CASE("sse matches an independent double loop") {
  const Matrix points = testutil::random_matrix(40, 5, 13);
  const Matrix centroids = testutil::random_matrix(6, 5, 14);
  std::vector<int> assignment(40);
  fsel::Rng rng(15);
  for (auto& a : assignment) a = static_cast<int>(rng.next_index(6));
  double expect = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    double term = 0.0;
    for (Index j = 0; j < points.cols(); ++j) {
      const double diff = points(i, j) - centroids(assignment[i], j);
      term += diff * diff;
    }
    expect += term;
  }
  const double got = fsel::sse(points, centroids, assignment);
  CHECK(got == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sse validates its inputs") {
  const Matrix points = testutil::random_matrix(4, 3, 1);
  const Matrix centroids = testutil::random_matrix(2, 3, 2);
  CHECK_THROWS_AS(fsel::sse(points, centroids, std::vector<int>{0, 1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fsel::sse(points, centroids, std::vector<int>{0, 1, 0, 2}),
                  std::invalid_argument);
  const Matrix wrong_d = testutil::random_matrix(2, 4, 3);
  CHECK_THROWS_AS(fsel::sse(points, wrong_d, std::vector<int>{0, 1, 0, 1}),
                  std::invalid_argument);
}
