// Copyright 2026 The vidret Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidret/store.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_set>

namespace vidret {
namespace {

static_assert(std::endian::native == std::endian::little,
              "VRTEMB01 codec assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncatedFile,
                  "store ends at byte " + std::to_string(bytes_.size()));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void check_items(const std::vector<CorpusItem>& items) {
  std::unordered_set<std::string_view> ids;
  for (const auto& item : items) {
    if (item.embedding.dim() != items.front().embedding.dim()) {
      throw Error(ErrorCode::kDimensionMismatch, "store items must share dim");
    }
    if (item.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::kInvalidArgument, "item id longer than 65535 bytes");
    }
    if (!ids.insert(item.id).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate id '" + item.id + "'");
    }
  }
}

}  // namespace

std::size_t store_size_bytes(const std::vector<CorpusItem>& items) {
  std::size_t total = kStoreHeaderSize;
  for (const auto& item : items) {
    total += sizeof(std::uint16_t) + item.id.size() + item.embedding.dim() * sizeof(float);
  }
  return total;
}

std::string encode_store(const std::vector<CorpusItem>& items) {
  check_items(items);
  const std::uint32_t dim =
      items.empty() ? 0 : static_cast<std::uint32_t>(items.front().embedding.dim());
  bool all_normalized = !items.empty();
  for (const auto& item : items) all_normalized = all_normalized && item.embedding.normalized();

  std::string out;
  out.reserve(store_size_bytes(items));
  out.append(kStoreMagic);
  put<std::uint32_t>(out, dim);
  put<std::uint64_t>(out, items.size());
  put<std::uint8_t>(out, all_normalized ? 1 : 0);
  out.append(3, '\0');
  for (const auto& item : items) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(item.id.size()));
    out.append(item.id);
    for (double v : item.embedding.values()) put<float>(out, static_cast<float>(v));
  }
  return out;
}

std::vector<CorpusItem> decode_store(std::string_view bytes, ItemKind kind) {
  Reader in(bytes);
  if (bytes.size() < kStoreMagic.size() || bytes.substr(0, kStoreMagic.size()) != kStoreMagic) {
    throw Error(ErrorCode::kBadMagic, "not a VRTEMB01 store");
  }
  in.take(kStoreMagic.size());
  const auto dim = in.get<std::uint32_t>();
  const auto count = in.get<std::uint64_t>();
  const auto flag = in.get<std::uint8_t>();
  in.take(3);
  if (flag > 1) throw Error(ErrorCode::kBadMagic, "normalized flag must be 0 or 1");
  if (count > 0 && dim == 0) throw Error(ErrorCode::kDimensionMismatch, "store with dim 0");
  // Each record needs at least 2 + 4*dim bytes; reject absurd counts early.
  if (count > in.remaining() / (2 + 4 * static_cast<std::uint64_t>(dim) + (dim == 0))) {
    throw Error(ErrorCode::kTruncatedFile, "record count exceeds file size");
  }

  std::vector<CorpusItem> items;
  items.reserve(count);
  std::unordered_set<std::string> ids;
  for (std::uint64_t r = 0; r < count; ++r) {
    const auto id_len = in.get<std::uint16_t>();
    std::string id(in.take(id_len));
    std::vector<double> values(dim);
    for (auto& v : values) v = static_cast<double>(in.get<float>());
    if (!ids.insert(id).second) throw Error(ErrorCode::kDuplicateId, "duplicate id '" + id + "'");
    items.push_back(CorpusItem{std::move(id), kind, EmbeddingVector(std::move(values), flag == 1)});
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kTruncatedFile, "trailing bytes after last record");
  }
  return items;
}

void write_store(const std::filesystem::path& path, const std::vector<CorpusItem>& items) {
  const std::string bytes = encode_store(items);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<CorpusItem> read_store(const std::filesystem::path& path, ItemKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_store(bytes, kind);
}

}  // namespace vidret
