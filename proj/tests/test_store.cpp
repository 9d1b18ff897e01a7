// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "vidret/store.hpp"

namespace vidret {
namespace {

// Values with exact float32 representations so round trips compare equal.
std::vector<CorpusItem> exact_items(std::uint64_t seed, std::size_t n, std::size_t dim) {
  Rng rng(seed);
  std::vector<CorpusItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (double& x : v) x = static_cast<float>(rng.normal());
    items.push_back({"id-" + std::to_string(i), ItemKind::kVideo, EmbeddingVector(std::move(v))});
  }
  return items;
}

ErrorCode decode_error(std::string_view bytes) {
  try {
    decode_store(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ErrorCode::kInvalidArgument;
}

TEST(Store, EmptyStore) {
  const auto bytes = encode_store({});
  EXPECT_EQ(bytes.size(), 24u);
  EXPECT_TRUE(decode_store(bytes).empty());
}

TEST(Store, HeaderLayout) {
  std::vector<CorpusItem> items{{"ab", ItemKind::kVideo, EmbeddingVector({0.6, 0.8}, true)}};
  const auto bytes = encode_store(items);
  ASSERT_EQ(bytes.size(), 24u + 2 + 2 + 8);
  EXPECT_EQ(bytes.substr(0, 8), "VRTEMB01");
  std::uint32_t dim;
  std::uint64_t count;
  std::memcpy(&dim, bytes.data() + 8, 4);
  std::memcpy(&count, bytes.data() + 12, 8);
  EXPECT_EQ(dim, 2u);
  EXPECT_EQ(count, 1u);
  EXPECT_EQ(bytes[20], 1);
  EXPECT_EQ(bytes.substr(21, 3), std::string(3, '\0'));
  std::uint16_t id_len;
  std::memcpy(&id_len, bytes.data() + 24, 2);
  EXPECT_EQ(id_len, 2u);
  EXPECT_EQ(bytes.substr(26, 2), "ab");
  float first;
  std::memcpy(&first, bytes.data() + 28, 4);
  EXPECT_EQ(first, 0.6f);
}

TEST(Store, SizeArithmetic) {
  // 24-byte header + sum over records of (2 + id_len + 4 * dim).
  std::vector<CorpusItem> items{{"a", ItemKind::kVideo, EmbeddingVector({1, 2, 3, 4})},
                                {"bcd", ItemKind::kVideo, EmbeddingVector({5, 6, 7, 8})}};
  const std::size_t expected = 24 + (2 + 1 + 16) + (2 + 3 + 16);
  EXPECT_EQ(store_size_bytes(items), expected);
  EXPECT_EQ(encode_store(items).size(), expected);
  EXPECT_EQ(encode_store(items)[20], 0);
}

TEST(Store, RoundTripProperty) {
  testing::TempDir dir;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto items = exact_items(seed, rng.uniform_index(20), 1 + rng.uniform_index(32));
    const auto path = dir / ("s" + std::to_string(seed) + ".bin");
    write_store(path, items);
    EXPECT_EQ(read_store(path), items);
    EXPECT_EQ(encode_store(decode_store(encode_store(items))), encode_store(items));
  }
}

TEST(Store, KindAssignedByReader) {
  const auto items = exact_items(1, 3, 4);
  for (const auto& item : decode_store(encode_store(items), ItemKind::kFrame)) {
    EXPECT_EQ(item.kind, ItemKind::kFrame);
  }
}

TEST(Store, CorruptedMagic) {
  auto bytes = encode_store(exact_items(2, 2, 4));
  bytes[0] = 'X';
  EXPECT_EQ(decode_error(bytes), ErrorCode::kBadMagic);
  EXPECT_EQ(decode_error("VRT"), ErrorCode::kBadMagic);
}

TEST(Store, BadFlag) {
  auto bytes = encode_store(exact_items(2, 2, 4));
  bytes[20] = 7;
  EXPECT_EQ(decode_error(bytes), ErrorCode::kBadMagic);
}

TEST(Store, Truncation) {
  const auto bytes = encode_store(exact_items(3, 4, 8));
  for (std::size_t cut : {std::size_t{10}, std::size_t{23}, std::size_t{30}, bytes.size() - 1}) {
    EXPECT_EQ(decode_error(std::string_view(bytes).substr(0, cut)), ErrorCode::kTruncatedFile) << cut;
  }
  EXPECT_EQ(decode_error(bytes + "x"), ErrorCode::kTruncatedFile);
}

TEST(Store, HugeCountRejected) {
  auto bytes = encode_store(exact_items(3, 1, 2));
  const std::uint64_t huge = 1ULL << 60;
  std::memcpy(bytes.data() + 12, &huge, 8);
  EXPECT_EQ(decode_error(bytes), ErrorCode::kTruncatedFile);
}

TEST(Store, EncodeErrors) {
  std::vector<CorpusItem> dup{{"a", ItemKind::kVideo, EmbeddingVector({1.0})},
                              {"a", ItemKind::kVideo, EmbeddingVector({2.0})}};
  try {
    encode_store(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDuplicateId);
  }
  std::vector<CorpusItem> mixed{{"a", ItemKind::kVideo, EmbeddingVector({1.0})},
                                {"b", ItemKind::kVideo, EmbeddingVector({1.0, 2.0})}};
  try {
    encode_store(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Store, MissingFile) {
  try {
    read_store("/nonexistent/dir/store.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

}  // namespace
}  // namespace vidret
