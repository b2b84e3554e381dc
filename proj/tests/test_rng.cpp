#include <catch2/catch_amalgamated.hpp>

#include <betabox/rng.hpp>

using namespace betabox;

// Known-answer vectors generated with NumPy's Philox bit generator
// (numpy 2.2.6), which implements the same Philox4x64-10 function. NumPy
// advances the counter before producing a block, so its first outputs for
// counter c correspond to evaluating c with the first word incremented.
TEST_CASE("philox matches numpy reference blocks") {
    auto block = rng::philox4x64({1, 0, 0, 0}, {0, 0});
    CHECK(block[0] == 0x02f4ba6408e4d89bull);
    CHECK(block[1] == 0x3dd62b0b9ca8c5b2ull);
    CHECK(block[2] == 0x1c8667a55d902e79ull);
    CHECK(block[3] == 0x907d7a052fd5b4dcull);

    block = rng::philox4x64({1, 0, 0, 0}, {0x243F6A8885A308D3ull, 0x13198A2E03707344ull});
    CHECK(block[0] == 0xd96148ed4eef3177ull);
    CHECK(block[1] == 0x3756c9977974e2e4ull);
    CHECK(block[2] == 0xaca97084472822a9ull);
    CHECK(block[3] == 0xf84393111bc816fcull);

    block = rng::philox4x64({8, 42, 3, 0}, {0xDEADBEEFull, 1});
    CHECK(block[0] == 0xb8b60f2c2aa0286dull);
    CHECK(block[1] == 0xb2b9f54bbffa8612ull);
    CHECK(block[2] == 0xdb64a64ab729aa64ull);
    CHECK(block[3] == 0xc80141d73d96610bull);

    // numpy counter (ff..ff, ...) wraps to all zero before the first block
    block = rng::philox4x64({0, 0, 0, 0}, {0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull});
    CHECK(block[0] == 0x44b7493d1acfc229ull);
    CHECK(block[1] == 0x6636af8e997921ddull);
    CHECK(block[2] == 0x3f73e132b5b3780eull);
    CHECK(block[3] == 0x605644dde03b01b1ull);

    block = rng::philox4x64({7, 6, 7, 8}, {9, 10});
    CHECK(block[0] == 0x116e09ccbf1365e9ull);
    CHECK(block[1] == 0x603c18692f02accbull);
    CHECK(block[2] == 0xd0147a841cbbd48full);
    CHECK(block[3] == 0x9743992c2015f98aull);
}

TEST_CASE("unit conversion stays in [0,1) and keeps 53 bits") {
    CHECK(rng::to_unit(0) == 0.0);
    CHECK(rng::to_unit(0xFFFFFFFFFFFFFFFFull) < 1.0);
    CHECK(rng::to_unit(0xFFFFFFFFFFFFFFFFull) > 0.9999999999999998);
    CHECK(rng::to_unit(1ull << 11) == 0x1.0p-53);
}

TEST_CASE("stream walks slots in order and matches random access") {
    rng::Stream s(99, rng::Domain::sampling, 7);
    for (std::uint64_t slot = 0; slot < 23; ++slot) {
        double sequential = s.next();
        CHECK(sequential == rng::uniform_at(99, rng::Domain::sampling, 7, slot));
    }
}

TEST_CASE("stream can open mid-stream for sharding") {
    rng::Stream whole(5, rng::Domain::toys, 0);
    for (int i = 0; i < 10; ++i) whole.next();
    rng::Stream shard(5, rng::Domain::toys, 0, 10);
    for (int i = 0; i < 10; ++i)
        CHECK(shard.next() == rng::uniform_at(5, rng::Domain::toys, 0, 10 + i));
}

TEST_CASE("streams and domains do not collide") {
    // different stream ids, same slots
    CHECK(rng::uniform_at(1, rng::Domain::sampling, 0, 0) !=
          rng::uniform_at(1, rng::Domain::sampling, 1, 0));
    // same stream, different domains
    CHECK(rng::uniform_at(1, rng::Domain::sampling, 0, 0) !=
          rng::uniform_at(1, rng::Domain::rotations, 0, 0));
    // different seeds
    CHECK(rng::uniform_at(1, rng::Domain::sampling, 0, 0) !=
          rng::uniform_at(2, rng::Domain::sampling, 0, 0));
}

TEST_CASE("uniformity sanity over one stream") {
    rng::Stream s(2024, rng::Domain::search, 3);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = s.next();
        sum += u;
        sumsq += u * u;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 0.005);       // sd of mean ~ 0.0009
    CHECK(std::abs(var - 1.0 / 12.0) < 0.003);
}
