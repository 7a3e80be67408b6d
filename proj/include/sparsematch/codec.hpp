// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sparsematch/model.hpp"

namespace spm {

// ---------------------------------------------------------------------------
// 32-bit stream items
//
// bit 31 = 1: header item, bits [30:0] hold the pattern identifier.
// bit 31 = 0: pair item, bits [30:12] hold the key, bits [11:0] the count.
// 0xFFFFFFFF (header with the reserved identifier 2^31-1) is page padding and
// never valid data.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kPadWord = 0xffffffffu;

struct StreamItem {
    std::uint32_t raw = 0;

    static constexpr std::uint32_t kHeaderBit = 0x80000000u;

    static StreamItem header(std::uint32_t pattern_id) { return {kHeaderBit | pattern_id}; }
    static StreamItem pair(std::uint32_t key, std::uint32_t value) { return {(key << 12) | value}; }
    static StreamItem padding() { return {kPadWord}; }

    bool is_header() const { return (raw & kHeaderBit) != 0; }
    bool is_padding() const { return raw == kPadWord; }
    std::uint32_t pattern_id() const { return raw & 0x7fffffffu; }
    std::uint32_t key() const { return (raw >> 12) & 0x7ffffu; }
    std::uint32_t value() const { return raw & 0xfffu; }

    friend bool operator==(const StreamItem&, const StreamItem&) = default;
};

inline constexpr std::uint32_t kDefaultPageSize = 8192;  // bytes

/// One flash-page worth of stream items. The payload always holds exactly
/// page_size/4 items; short final pages are filled with padding words.
struct Page {
    std::uint64_t seq = 0;
    std::vector<StreamItem> payload;

    friend bool operator==(const Page&, const Page&) = default;
};

struct EncodingError : Error {
    using Error::Error;
};

/// Malformed binary stream. `offset` is the item index of the offending word.
struct FormatError : Error {
    FormatError(const std::string& what, std::size_t item_offset)
        : Error(what + " (item offset " + std::to_string(item_offset) + ")"), offset(item_offset) {}
    std::size_t offset;
};

/// A page arrived farther from its in-order position than the reorder window
/// can absorb.
struct ReorderOverflow : Error {
    explicit ReorderOverflow(std::uint64_t page_seq)
        : Error("page " + std::to_string(page_seq) + " displaced beyond the reorder window"),
          seq(page_seq) {}
    std::uint64_t seq;
};

struct StreamIntegrityError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Record encoding
// ---------------------------------------------------------------------------

inline void encode_append(const SparseVector& doc, std::vector<StreamItem>& out) {
    if (doc.id > kMaxPatternId)
        throw EncodingError("pattern id " + std::to_string(doc.id) + " exceeds the 31-bit field");
    out.push_back(StreamItem::header(doc.id));
    for (const TermEntry& e : doc.entries) {
        if (e.key > kMaxWordKey || e.value > kMaxCount)
            throw EncodingError("entry (" + std::to_string(e.key) + ", " + std::to_string(e.value) +
                                ") does not fit the 19/12-bit item fields");
        out.push_back(StreamItem::pair(e.key, e.value));
    }
}

/// One pattern identifier followed by one pair item per entry, ascending keys.
inline std::vector<StreamItem> encode_record(const SparseVector& doc) {
    std::vector<StreamItem> items;
    items.reserve(1 + doc.entries.size());
    encode_append(doc, items);
    return items;
}

inline std::vector<StreamItem> encode_corpus(std::span<const SparseVector> corpus) {
    std::size_t total = 0;
    for (const SparseVector& d : corpus) total += 1 + d.entries.size();
    std::vector<StreamItem> items;
    items.reserve(total);
    for (const SparseVector& d : corpus) encode_append(d, items);
    return items;
}

/// Splits the stream at header items; padding terminates decoding. Keys within
/// a record must be strictly ascending.
inline std::vector<SparseVector> decode_stream(std::span<const StreamItem> items) {
    std::vector<SparseVector> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const StreamItem it = items[i];
        if (it.is_padding()) break;
        if (it.is_header()) {
            out.push_back(SparseVector{it.pattern_id(), {}});
            continue;
        }
        if (out.empty()) throw FormatError("key/value pair before any pattern header", i);
        std::vector<TermEntry>& entries = out.back().entries;
        if (!entries.empty() && entries.back().key >= it.key())
            throw FormatError("keys not strictly ascending", i);
        entries.push_back(TermEntry{it.key(), it.value()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pagination and out-of-order page recovery
// ---------------------------------------------------------------------------

inline std::vector<Page> paginate(std::span<const StreamItem> items, std::uint32_t page_size = kDefaultPageSize) {
    if (page_size == 0 || page_size % 4 != 0)
        throw std::invalid_argument("page size must be a positive multiple of 4");
    const std::size_t per_page = page_size / 4;
    std::vector<Page> pages;
    for (std::size_t off = 0; off < items.size(); off += per_page) {
        Page p;
        p.seq = pages.size();
        const std::size_t n = std::min(per_page, items.size() - off);
        p.payload.assign(items.begin() + off, items.begin() + off + n);
        p.payload.resize(per_page, StreamItem::padding());
        pages.push_back(std::move(p));
    }
    return pages;
}

/// Restores item order from pages arriving out of order, buffering at most
/// `window` pages. A page displaced more than `window` positions from its
/// sequence number raises ReorderOverflow; duplicated or missing sequence
/// numbers raise StreamIntegrityError.
class PageReorderer {
  public:
    explicit PageReorderer(std::uint64_t window) : window_(window) {}

    void push(const Page& page, std::vector<StreamItem>& out) {
        const std::uint64_t position = arrived_++;
        if (page.seq < next_ || pending_.count(page.seq))
            throw StreamIntegrityError("duplicate page seq " + std::to_string(page.seq));
        const std::uint64_t displacement =
            page.seq > position ? page.seq - position : position - page.seq;
        if (displacement > window_) throw ReorderOverflow(page.seq);
        if (page.seq == next_) {
            emit(page.payload, out);
            ++next_;
            for (auto it = pending_.begin(); it != pending_.end() && it->first == next_;) {
                emit(it->second, out);
                ++next_;
                it = pending_.erase(it);
            }
        } else {
            pending_.emplace(page.seq, page.payload);
            // The buffer can only outgrow the window if page `next_` is going
            // to arrive displaced beyond it; fail now instead of buffering on.
            if (pending_.size() > window_) throw ReorderOverflow(next_);
        }
    }

    void finish() const {
        if (!pending_.empty())
            throw StreamIntegrityError("missing page seq " + std::to_string(next_));
    }

    std::uint64_t pages_emitted() const { return next_; }

  private:
    static void emit(const std::vector<StreamItem>& payload, std::vector<StreamItem>& out) {
        out.insert(out.end(), payload.begin(), payload.end());
    }

    std::uint64_t window_;
    std::uint64_t next_ = 0;
    std::uint64_t arrived_ = 0;
    std::map<std::uint64_t, std::vector<StreamItem>> pending_;
};

inline std::vector<StreamItem> reorder(std::span<const Page> pages, std::uint64_t window) {
    PageReorderer r(window);
    std::vector<StreamItem> out;
    for (const Page& p : pages) r.push(p, out);
    r.finish();
    return out;
}

// ---------------------------------------------------------------------------
// Storage footprint
// ---------------------------------------------------------------------------

inline unsigned decimal_digits(std::uint64_t v) {
    unsigned d = 1;
    while (v >= 10) {
        v /= 10;
        ++d;
    }
    return d;
}

/// Bytes of the unpadded binary encoding divided by bytes of the UCI-style
/// "docID wordID count\n" text rendering of the same corpus. Returns +inf when
/// the text form is empty (corpus of empty documents).
inline double measure_savings(std::span<const SparseVector> corpus) {
    if (corpus.empty()) throw std::invalid_argument("measure_savings: empty corpus");
    std::uint64_t binary_bytes = 0, text_bytes = 0;
    for (const SparseVector& d : corpus) {
        binary_bytes += 4ull * (1 + d.entries.size());
        for (const TermEntry& e : d.entries)
            text_bytes += decimal_digits(d.id) + decimal_digits(e.key) + decimal_digits(e.value) + 3;
    }
    if (text_bytes == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(binary_bytes) / static_cast<double>(text_bytes);
}

// ---------------------------------------------------------------------------
// .spm container: "SPM1" magic, little-endian u32 page size, pages
// back-to-back in sequence order.
// ---------------------------------------------------------------------------

inline void write_le32(std::ostream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                       static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    out.write(b, 4);
}

inline std::uint32_t read_le32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_spm(std::ostream& out, std::span<const StreamItem> items,
                      std::uint32_t page_size = kDefaultPageSize) {
    if (page_size == 0 || page_size % 4 != 0)
        throw std::invalid_argument("page size must be a positive multiple of 4");
    out.write("SPM1", 4);
    write_le32(out, page_size);
    const std::size_t per_page = page_size / 4;
    std::size_t in_page = 0;
    for (const StreamItem it : items) {
        write_le32(out, it.raw);
        if (++in_page == per_page) in_page = 0;
    }
    if (in_page != 0)
        for (; in_page < per_page; ++in_page) write_le32(out, kPadWord);
}

inline void write_spm_file(const std::string& path, std::span<const StreamItem> items,
                           std::uint32_t page_size = kDefaultPageSize) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_spm(out, items, page_size);
    out.flush();
    if (!out) throw Error("write failed: " + path);
}

struct SpmData {
    std::uint32_t page_size = kDefaultPageSize;
    std::vector<Page> pages;

    std::vector<StreamItem> items() const {
        std::vector<StreamItem> all;
        for (const Page& p : pages) all.insert(all.end(), p.payload.begin(), p.payload.end());
        return all;
    }
};

inline SpmData read_spm(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "SPM1") throw FormatError("bad magic, not an .spm stream", 0);
    SpmData data;
    data.page_size = read_le32(in);
    if (!in || data.page_size == 0 || data.page_size % 4 != 0)
        throw FormatError("invalid page size field", 0);
    const std::size_t per_page = data.page_size / 4;
    while (in.peek() != std::char_traits<char>::eof()) {
        Page p;
        p.seq = data.pages.size();
        p.payload.reserve(per_page);
        for (std::size_t i = 0; i < per_page; ++i) {
            const std::uint32_t raw = read_le32(in);
            if (!in) throw FormatError("truncated page", data.pages.size() * per_page + i);
            p.payload.push_back(StreamItem{raw});
        }
        data.pages.push_back(std::move(p));
    }
    return data;
}

inline SpmData read_spm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return read_spm(in);
}

inline std::vector<SparseVector> read_spm_corpus(const std::string& path) {
    const std::vector<StreamItem> items = read_spm_file(path).items();
    return decode_stream(items);
}

}  // namespace spm
