// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsematch/model.hpp"

namespace spm {

struct AlphabetError : Error {
    AlphabetError(char symbol, std::size_t pos)
        : Error(std::string("unknown amino-acid symbol '") + symbol + "' at position " +
                std::to_string(pos)),
          position(pos) {}
    std::size_t position;
};

struct VocabOverflow : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Protein sequences as bags of 3-mers
//
// Alphabet: the 20 canonical amino acids plus B, Z, X, U, O — every letter
// except J — so real FASTA inputs with extended IUPAC codes encode cleanly.
// A 3-mer id is the base-25 value of its three symbol ordinals.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kProteinSymbolCount = 25;
inline constexpr std::uint32_t kThreeMerCount = 25 * 25 * 25;  // 15625

/// Ordinal of an amino-acid symbol (case-insensitive), or -1 if unknown.
inline int protein_ordinal(char c) {
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u < 'A' || u > 'Z' || u == 'J') return -1;
    return u - 'A' - (u > 'J' ? 1 : 0);
}

inline std::uint32_t three_mer_id(int o0, int o1, int o2) {
    return static_cast<std::uint32_t>(o0 * 625 + o1 * 25 + o2);
}

/// Inverse of three_mer_id.
inline std::array<char, 3> three_mer_symbols(std::uint32_t id) {
    constexpr std::string_view symbols = "ABCDEFGHIKLMNOPQRSTUVWXYZ";
    return {symbols[(id / 625) % 25], symbols[(id / 25) % 25], symbols[id % 25]};
}

/// Counts every length-3 sliding window of the sequence. Sequences shorter
/// than 3 symbols yield an empty vector.
inline SparseVector protein_to_bow(std::string_view sequence, std::uint32_t id) {
    std::vector<int> ordinals;
    ordinals.reserve(sequence.size());
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const int o = protein_ordinal(sequence[i]);
        if (o < 0) throw AlphabetError(sequence[i], i);
        ordinals.push_back(o);
    }
    std::vector<std::uint32_t> counts(kThreeMerCount, 0);
    if (ordinals.size() >= 3)
        for (std::size_t i = 0; i + 2 < ordinals.size(); ++i)
            ++counts[three_mer_id(ordinals[i], ordinals[i + 1], ordinals[i + 2])];
    SparseVector vec{id, {}};
    for (std::uint32_t k = 0; k < kThreeMerCount; ++k)
        if (counts[k] != 0) vec.entries.push_back(TermEntry{k, std::min(counts[k], kMaxCount)});
    return vec;
}

// ---------------------------------------------------------------------------
// Labeled subgraphs as bags of edges
// ---------------------------------------------------------------------------

using Edge = std::pair<std::string, std::string>;

/// Maps directed labeled edges to word ids, assigned first-seen sequentially.
/// (a,b) and (b,a) are distinct words; undirected inputs must canonicalize
/// the pair order before encoding.
class EdgeVocabulary {
  public:
    std::uint32_t id_for(const Edge& edge) {
        const auto it = ids_.find(edge);
        if (it != ids_.end()) return it->second;
        if (ids_.size() > kMaxWordKey)
            throw VocabOverflow("edge vocabulary exceeds the 19-bit key space");
        const std::uint32_t id = static_cast<std::uint32_t>(ids_.size());
        ids_.emplace(edge, id);
        return id;
    }

    std::size_t size() const { return ids_.size(); }

    const std::map<Edge, std::uint32_t>& mapping() const { return ids_; }

  private:
    std::map<Edge, std::uint32_t> ids_;
};

/// Encodes one subgraph: each distinct labeled edge becomes a word, repeated
/// edges accumulate counts. New edges extend the vocabulary in place.
inline SparseVector subgraph_to_bow(std::span<const Edge> edges, EdgeVocabulary& vocab,
                                    std::uint32_t id) {
    std::map<std::uint32_t, std::uint64_t> counts;
    for (const Edge& e : edges) ++counts[vocab.id_for(e)];
    SparseVector vec{id, {}};
    vec.entries.reserve(counts.size());
    for (const auto& [key, count] : counts)
        vec.entries.push_back(TermEntry{key, static_cast<std::uint32_t>(std::min<std::uint64_t>(count, kMaxCount))});
    return vec;
}

// ---------------------------------------------------------------------------
// Text inputs
// ---------------------------------------------------------------------------

struct FastaRecord {
    std::string header;  // text after '>'
    std::string sequence;
};

inline std::vector<FastaRecord> parse_fasta(std::istream& in) {
    std::vector<FastaRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '>') {
            records.push_back(FastaRecord{line.substr(1), ""});
            continue;
        }
        if (records.empty()) throw ParseError("sequence data before the first '>' header", 1);
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) records.back().sequence.push_back(c);
    }
    return records;
}

/// Edge-list text: one "src_label dst_label" per line, blank lines separate
/// subgraphs.
inline std::vector<std::vector<Edge>> parse_edge_lists(std::istream& in) {
    std::vector<std::vector<Edge>> graphs;
    std::vector<Edge> current;
    std::string line;
    std::size_t line_number = 0;
    auto flush = [&] {
        if (!current.empty()) {
            graphs.push_back(current);
            current.clear();
        }
    };
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string src, dst, extra;
        std::istringstream fields(line);
        if (!(fields >> src)) {  // blank line: subgraph boundary
            flush();
            continue;
        }
        if (!(fields >> dst) || (fields >> extra))
            throw ParseError("expected two labels: src dst", line_number);
        current.emplace_back(std::move(src), std::move(dst));
    }
    flush();
    return graphs;
}

}  // namespace spm
