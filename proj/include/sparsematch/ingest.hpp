// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsematch/model.hpp"

namespace spm {

/// One {documentID, wordID, wordCount} line of a UCI docword file.
struct Triple {
    std::uint32_t doc = 0;
    std::uint32_t word = 0;
    std::uint64_t count = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

struct UciHeader {
    std::uint64_t num_docs = 0;      // D
    std::uint64_t vocab_size = 0;    // W
    std::uint64_t declared_nnz = 0;  // NNZ
};

struct UciDocword {
    UciHeader header;
    std::vector<Triple> triples;
    std::vector<std::string> warnings;  // non-fatal integrity findings
};

struct CorpusStats {
    std::uint64_t num_docs = 0;
    std::uint64_t vocab_size = 0;
    std::uint64_t total_nnz = 0;
    double avg_nnz_per_doc = 0.0;
    double sparsity = 0.0;  // avg_nnz_per_doc / vocab_size
    std::uint64_t saturated_count = 0;
};

namespace detail {

inline std::vector<std::uint64_t> parse_fields(std::string_view line, std::size_t line_number) {
    std::vector<std::uint64_t> fields;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p != end) {
        while (p != end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
        if (p == end) break;
        std::uint64_t v = 0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc() || (next != end && *next != ' ' && *next != '\t' && *next != '\r'))
            throw ParseError("expected an unsigned integer", line_number);
        fields.push_back(v);
        p = next;
    }
    return fields;
}

inline bool blank_line(std::string_view line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

}  // namespace detail

/// Reads the UCI bag-of-words docword format: three header lines D, W, NNZ
/// followed by one {doc, word, count} triple per line. Triples are returned
/// verbatim; a count mismatch against NNZ is reported as a warning, not an
/// error.
inline UciDocword parse_uci_docword(std::istream& in) {
    UciDocword out;
    std::string line;
    std::size_t line_number = 0;
    int header_fields = 0;
    std::uint64_t header[3] = {0, 0, 0};

    while (header_fields < 3 && std::getline(in, line)) {
        ++line_number;
        if (detail::blank_line(line)) continue;
        const auto fields = detail::parse_fields(line, line_number);
        if (fields.size() != 1) throw ParseError("header line must hold a single integer", line_number);
        header[header_fields++] = fields[0];
    }
    if (header_fields < 3) throw ParseError("missing D/W/NNZ header", line_number + 1);
    out.header = UciHeader{header[0], header[1], header[2]};

    while (std::getline(in, line)) {
        ++line_number;
        if (detail::blank_line(line)) continue;
        const auto fields = detail::parse_fields(line, line_number);
        if (fields.size() != 3) throw ParseError("expected three integers: doc word count", line_number);
        const std::uint64_t doc = fields[0], word = fields[1], count = fields[2];
        if (doc == 0 || doc > out.header.num_docs)
            throw RangeError("line " + std::to_string(line_number) + ": document id " +
                             std::to_string(doc) + " outside [1, " + std::to_string(out.header.num_docs) + "]");
        if (word == 0 || word > out.header.vocab_size)
            throw RangeError("line " + std::to_string(line_number) + ": word id " + std::to_string(word) +
                             " outside [1, " + std::to_string(out.header.vocab_size) + "]");
        if (doc > kMaxPatternId)
            throw RangeError("line " + std::to_string(line_number) + ": document id " +
                             std::to_string(doc) + " exceeds the 31-bit pattern field");
        out.triples.push_back(Triple{static_cast<std::uint32_t>(doc),
                                     static_cast<std::uint32_t>(word), count});
    }
    if (out.triples.size() != out.header.declared_nnz)
        out.warnings.push_back("NNZ mismatch: header declares " +
                               std::to_string(out.header.declared_nnz) + " triples, file holds " +
                               std::to_string(out.triples.size()));
    return out;
}

struct CorpusBuild {
    std::vector<SparseVector> docs;
    std::uint64_t saturated_count = 0;  // entries clamped to 4095
};

/// Turns contiguous runs of triples into documents: entries sorted ascending
/// by word id, duplicate (doc, word) pairs merged by summing, counts
/// saturated at 4095, zero counts dropped. Word ids are kept 1-based as in
/// the source files.
inline CorpusBuild build_corpus(std::span<const Triple> triples) {
    CorpusBuild out;
    std::size_t i = 0;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> run;  // (word, raw count)
    while (i < triples.size()) {
        const std::uint32_t doc = triples[i].doc;
        run.clear();
        for (; i < triples.size() && triples[i].doc == doc; ++i) {
            const Triple& t = triples[i];
            if (t.word > kMaxWordKey)
                throw RangeError("word id " + std::to_string(t.word) + " exceeds the 19-bit key field");
            if (t.count == 0) continue;
            run.emplace_back(t.word, t.count);
        }
        std::sort(run.begin(), run.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        SparseVector vec{doc, {}};
        vec.entries.reserve(run.size());
        for (std::size_t j = 0; j < run.size();) {
            const std::uint32_t word = run[j].first;
            std::uint64_t sum = 0;
            for (; j < run.size() && run[j].first == word; ++j) sum += run[j].second;
            if (sum > kMaxCount) {
                sum = kMaxCount;
                ++out.saturated_count;
            }
            vec.entries.push_back(TermEntry{word, static_cast<std::uint32_t>(sum)});
        }
        out.docs.push_back(std::move(vec));
    }
    return out;
}

/// Field-by-field statistics of a built corpus. `saturated_count` is carried
/// through from build_corpus since it cannot be recovered from the clamped
/// entries.
inline CorpusStats corpus_stats(std::span<const SparseVector> corpus, std::uint64_t vocab_size,
                                std::uint64_t saturated_count = 0) {
    CorpusStats s;
    s.num_docs = corpus.size();
    s.vocab_size = vocab_size;
    for (const SparseVector& d : corpus) s.total_nnz += d.entries.size();
    s.saturated_count = saturated_count;
    if (s.num_docs > 0) s.avg_nnz_per_doc = static_cast<double>(s.total_nnz) / static_cast<double>(s.num_docs);
    if (vocab_size > 0 && s.num_docs > 0) s.sparsity = s.avg_nnz_per_doc / static_cast<double>(vocab_size);
    return s;
}

/// Vocabulary file: one word per line; word id w (1-based) maps to line w.
inline std::vector<std::string> load_vocabulary(std::istream& in) {
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        words.push_back(line);
    }
    return words;
}

}  // namespace spm
