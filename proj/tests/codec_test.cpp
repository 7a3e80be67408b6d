// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#include "sparsematch/codec.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "test_util.hpp"

using namespace spm;

TEST(StreamItem, BitLayout) {
    EXPECT_EQ(encode_record(SparseVector{42, {}}), (std::vector<StreamItem>{{0x8000002Au}}));
    EXPECT_EQ(encode_record(SparseVector{0, {{7, 5}}}),
              (std::vector<StreamItem>{{0x80000000u}, {0x00007005u}}));
    const StreamItem pair = StreamItem::pair(kMaxWordKey, kMaxCount);
    EXPECT_FALSE(pair.is_header());
    EXPECT_EQ(pair.key(), kMaxWordKey);
    EXPECT_EQ(pair.value(), kMaxCount);
}

TEST(StreamItem, ReservedIdIsPadding) {
    EXPECT_TRUE(StreamItem::header((1u << 31) - 1).is_padding());
    EXPECT_THROW(encode_record(SparseVector{(1u << 31) - 1, {}}), EncodingError);
    EXPECT_NO_THROW(encode_record(SparseVector{kMaxPatternId, {}}));
}

TEST(StreamItem, EncodeRejectsOverwideFields) {
    EXPECT_THROW(encode_record(SparseVector{1, {{kMaxWordKey + 1, 1}}}), EncodingError);
    EXPECT_THROW(encode_record(SparseVector{1, {{1, kMaxCount + 1}}}), EncodingError);
    EXPECT_NO_THROW(encode_record(SparseVector{1, {{kMaxWordKey, kMaxCount}}}));
}

TEST(Codec, WorkedDocRoundTrips) {
    const SparseVector a = testutil::worked_doc_a();
    const auto items = encode_record(a);
    EXPECT_EQ(items.size(), 5u);
    const auto docs = decode_stream(items);
    ASSERT_EQ(docs.size(), 1u);
    EXPECT_EQ(docs[0], a);
}

TEST(Codec, DecodeEmptyHeaderOnly) {
    const auto docs = decode_stream(std::vector<StreamItem>{{0x8000002Au}});
    ASSERT_EQ(docs.size(), 1u);
    EXPECT_EQ(docs[0].id, 42u);
    EXPECT_TRUE(docs[0].entries.empty());
}

TEST(Codec, PairBeforeHeaderFails) {
    const std::vector<StreamItem> items{{0x00007005u}};
    try {
        decode_stream(items);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset, 0u);
    }
}

TEST(Codec, NonAscendingKeyFails) {
    std::vector<StreamItem> items{StreamItem::header(1), StreamItem::pair(5, 1), StreamItem::pair(5, 2)};
    try {
        decode_stream(items);
        FAIL() << "expected FormatError";
    } catch (const FormatError& e) {
        EXPECT_EQ(e.offset, 2u);
    }
    items[2] = StreamItem::pair(3, 2);
    EXPECT_THROW(decode_stream(items), FormatError);
}

TEST(Codec, DecodeStopsAtPadding) {
    const std::vector<StreamItem> items{StreamItem::header(1), StreamItem::pair(3, 2),
                                        StreamItem::padding(), StreamItem::header(9)};
    const auto docs = decode_stream(items);
    ASSERT_EQ(docs.size(), 1u);
    EXPECT_EQ(docs[0].id, 1u);
}

TEST(Codec, RoundTripRandomCorpora) {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 200; ++trial) {
        const auto corpus = testutil::random_corpus(rng, 1 + static_cast<std::size_t>(rng() % 20), 300, 0, 30);
        const auto items = encode_corpus(corpus);
        EXPECT_EQ(items.size() * 4,
                  4 * (corpus.size() + std::accumulate(corpus.begin(), corpus.end(), std::size_t{0},
                                                       [](std::size_t acc, const SparseVector& d) {
                                                           return acc + d.entries.size();
                                                       })));
        ASSERT_EQ(decode_stream(items), corpus);
    }
}

TEST(Paginate, ExactFit) {
    const std::vector<StreamItem> items(2048, StreamItem::header(1));
    const auto pages = paginate(items, 8192);
    ASSERT_EQ(pages.size(), 1u);
    EXPECT_EQ(pages[0].seq, 0u);
    EXPECT_EQ(pages[0].payload.size(), 2048u);
}

TEST(Paginate, SplitAndPad) {
    const std::vector<StreamItem> items(2049, StreamItem::header(1));
    const auto pages = paginate(items, 8192);
    ASSERT_EQ(pages.size(), 2u);
    EXPECT_EQ(pages[1].payload[0], StreamItem::header(1));
    for (std::size_t i = 1; i < 2048; ++i) ASSERT_TRUE(pages[1].payload[i].is_padding());
}

TEST(Paginate, EmptyAndBadSize) {
    EXPECT_TRUE(paginate({}, 8192).empty());
    EXPECT_THROW(paginate({}, 6), std::invalid_argument);
    EXPECT_THROW(paginate({}, 0), std::invalid_argument);
}

namespace {

std::vector<Page> pages_for(const std::vector<StreamItem>& items, std::uint32_t page_size = 16) {
    return paginate(items, page_size);
}

// Permutation of [0, n) where no element moves farther than `bound` and at
// least one moves exactly `bound`.
std::vector<std::size_t> bounded_permutation(std::mt19937_64& rng, std::size_t n, std::size_t bound) {
    std::vector<std::size_t> perm(n);
    while (true) {
        std::iota(perm.begin(), perm.end(), 0);
        for (int swaps = 0; swaps < 400; ++swaps) {
            const std::size_t i = rng() % n;
            const std::size_t j = rng() % n;
            if (i == j) continue;
            const auto disp = [&](std::size_t val, std::size_t pos) {
                return val > pos ? val - pos : pos - val;
            };
            if (disp(perm[i], j) <= bound && disp(perm[j], i) <= bound) std::swap(perm[i], perm[j]);
        }
        std::size_t max_disp = 0;
        for (std::size_t p = 0; p < n; ++p)
            max_disp = std::max(max_disp, perm[p] > p ? perm[p] - p : p - perm[p]);
        if (max_disp == bound) return perm;
    }
}

}  // namespace

TEST(Reorder, InOrderIsIdentity) {
    std::mt19937_64 rng(8);
    const auto corpus = testutil::random_corpus(rng, 10, 100, 0, 10);
    const auto items = encode_corpus(corpus);
    const auto pages = pages_for(items);
    for (const std::uint64_t window : {0u, 1u, 5u}) {
        const auto restored = reorder(pages, window);
        ASSERT_GE(restored.size(), items.size());
        EXPECT_TRUE(std::equal(items.begin(), items.end(), restored.begin()));
    }
}

TEST(Reorder, SmallShuffleWithinWindow) {
    std::vector<StreamItem> items;
    for (std::uint32_t d = 0; d < 16; ++d) {
        items.push_back(StreamItem::header(d));
        items.push_back(StreamItem::pair(d + 1, 1));
    }
    const auto pages = pages_for(items, 8);  // 2 items per page -> 16 pages
    ASSERT_GE(pages.size(), 4u);
    std::vector<Page> shuffled{pages[1], pages[0], pages[3], pages[2]};
    for (std::size_t i = 4; i < pages.size(); ++i) shuffled.push_back(pages[i]);
    const auto restored = reorder(shuffled, 2);
    EXPECT_TRUE(std::equal(items.begin(), items.end(), restored.begin()));
}

TEST(Reorder, RandomPermutationsAtDisplacementBound) {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 40; ++trial) {
        const auto corpus = testutil::random_corpus(rng, 40, 200, 0, 12);
        const auto items = encode_corpus(corpus);
        auto pages = pages_for(items, 16);
        while (pages.size() < 64) pages.push_back(Page{pages.size(), std::vector<StreamItem>(4, StreamItem::padding())});
        const std::size_t bound = 1 + rng() % 8;
        const auto perm = bounded_permutation(rng, pages.size(), bound);
        std::vector<Page> shuffled(pages.size());
        for (std::size_t pos = 0; pos < perm.size(); ++pos) shuffled[pos] = pages[perm[pos]];

        const auto restored = reorder(shuffled, bound);
        std::vector<StreamItem> expected;
        for (const Page& p : pages) expected.insert(expected.end(), p.payload.begin(), p.payload.end());
        EXPECT_EQ(restored, expected);

        EXPECT_THROW(reorder(shuffled, bound - 1), ReorderOverflow);
    }
}

TEST(Reorder, DuplicateSeqFails) {
    std::vector<StreamItem> items(8, StreamItem::header(3));
    auto pages = pages_for(items, 16);
    ASSERT_EQ(pages.size(), 2u);
    const std::vector<Page> dup{pages[0], pages[0], pages[1]};
    EXPECT_THROW(reorder(dup, 4), StreamIntegrityError);
}

TEST(Reorder, MissingSeqFailsAtFinish) {
    std::vector<StreamItem> items(12, StreamItem::header(3));
    auto pages = pages_for(items, 16);  // 3 pages
    ASSERT_EQ(pages.size(), 3u);
    const std::vector<Page> missing{pages[0], pages[2]};
    EXPECT_THROW(reorder(missing, 4), StreamIntegrityError);
}

TEST(MeasureSavings, SingleTripleInflates) {
    const std::vector<SparseVector> corpus{SparseVector{1, {{7, 5}}}};
    // 8 bytes binary vs the 6-byte text line "1 7 5\n"
    EXPECT_NEAR(measure_savings(corpus), 8.0 / 6.0, 1e-12);
}

TEST(MeasureSavings, EmptyDocumentsReportInfinity) {
    const std::vector<SparseVector> corpus{SparseVector{1, {}}};
    EXPECT_TRUE(std::isinf(measure_savings(corpus)));
    EXPECT_THROW(measure_savings({}), std::invalid_argument);
}

TEST(MeasureSavings, RealisticCorpusSavesSpace) {
    std::mt19937_64 rng(77);
    auto corpus = testutil::random_corpus(rng, 200, 141000, 55, 65, 40);
    for (auto& d : corpus) d.id = 900000 + d.id;  // realistic multi-digit ids
    EXPECT_LE(measure_savings(corpus), 0.60);
}

TEST(SpmFile, RoundTripAndMagic) {
    std::mt19937_64 rng(4040);
    const auto corpus = testutil::random_corpus(rng, 25, 500, 0, 20);
    const auto items = encode_corpus(corpus);

    std::ostringstream buf;
    write_spm(buf, items, 64);
    const std::string bytes = buf.str();
    ASSERT_GE(bytes.size(), 8u);
    EXPECT_EQ(bytes.substr(0, 4), "SPM1");
    EXPECT_EQ((bytes.size() - 8) % 64, 0u);

    std::istringstream in(bytes);
    const SpmData data = read_spm(in);
    EXPECT_EQ(data.page_size, 64u);
    EXPECT_EQ(decode_stream(data.items()), corpus);
}

TEST(SpmFile, RejectsBadMagicAndTruncation) {
    std::istringstream bad("nope");
    EXPECT_THROW(read_spm(bad), FormatError);

    std::ostringstream buf;
    write_spm(buf, encode_record(SparseVector{1, {{2, 3}}}), 32);
    std::string bytes = buf.str();
    bytes.resize(bytes.size() - 5);  // tear the final page
    std::istringstream torn(bytes);
    EXPECT_THROW(read_spm(torn), FormatError);
}

TEST(SpmFile, FileHelpersRoundTrip) {
    std::mt19937_64 rng(11);
    const auto corpus = testutil::random_corpus(rng, 8, 100, 0, 10);
    const std::string path = std::filesystem::temp_directory_path() / "spm_codec_test.spm";
    write_spm_file(path, encode_corpus(corpus));
    EXPECT_EQ(read_spm_corpus(path), corpus);
    std::filesystem::remove(path);
}
