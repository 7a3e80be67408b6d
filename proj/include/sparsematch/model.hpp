// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsematch/errors.hpp"

namespace spm {

// Field widths of the 32-bit stream encoding. Word keys occupy 19 bits,
// occurrence counts 12 bits, pattern identifiers 31 bits with the all-ones
// identifier reserved as the page padding sentinel.
inline constexpr std::uint32_t kMaxWordKey = (1u << 19) - 1;
inline constexpr std::uint32_t kMaxCount = 4095;
inline constexpr std::uint32_t kMaxPatternId = (1u << 31) - 2;

/// One nonzero element of a bag-of-words vector: (word id, occurrence count).
struct TermEntry {
    std::uint32_t key = 0;
    std::uint32_t value = 0;

    friend bool operator==(const TermEntry&, const TermEntry&) = default;
};

/// A document or query pattern: identifier plus entries sorted strictly
/// ascending by key.
struct SparseVector {
    std::uint32_t id = 0;
    std::vector<TermEntry> entries;

    std::size_t nnz() const { return entries.size(); }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

inline bool entries_strictly_ascending(const std::vector<TermEntry>& entries) {
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i - 1].key >= entries[i].key) return false;
    return true;
}

/// Per-document score record. Integer fields are exact: at most 2^19 terms of
/// value <= 4095 each keeps every accumulator below 2^43.
struct MatchResult {
    std::uint32_t doc_id = 0;
    std::uint64_t dot = 0;
    std::uint64_t norm_q_sq = 0;
    std::uint64_t norm_c_sq = 0;
    double cosine = 0.0;
    std::uint32_t pp_count = 0;

    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Cosine from exact integer accumulators. A pair involving a zero vector
/// scores 0 so that results stay total and sortable.
inline double cosine_score(std::uint64_t dot, std::uint64_t norm_q_sq, std::uint64_t norm_c_sq) {
    if (norm_q_sq == 0 || norm_c_sq == 0) return 0.0;
    return static_cast<double>(dot) /
           (std::sqrt(static_cast<double>(norm_q_sq)) * std::sqrt(static_cast<double>(norm_c_sq)));
}

/// Scores one (query, candidate) pair with a sorted merge join over the two
/// entry lists. Only common keys contribute partial products.
inline MatchResult score_pair(const SparseVector& query, const SparseVector& candidate) {
    MatchResult r;
    r.doc_id = candidate.id;
    const auto& q = query.entries;
    const auto& c = candidate.entries;
    std::size_t qi = 0, ci = 0;
    while (qi < q.size() && ci < c.size()) {
        if (q[qi].key < c[ci].key) {
            ++qi;
        } else if (q[qi].key > c[ci].key) {
            ++ci;
        } else {
            r.dot += static_cast<std::uint64_t>(q[qi].value) * c[ci].value;
            ++r.pp_count;
            ++qi;
            ++ci;
        }
    }
    for (const TermEntry& e : q) r.norm_q_sq += static_cast<std::uint64_t>(e.value) * e.value;
    for (const TermEntry& e : c) r.norm_c_sq += static_cast<std::uint64_t>(e.value) * e.value;
    r.cosine = cosine_score(r.dot, r.norm_q_sq, r.norm_c_sq);
    return r;
}

struct DimensionError : Error {
    using Error::Error;
};

/// Brute-force reference scorer: expands both vectors to dense arrays of
/// length `dim` and evaluates the similarity term by term. This function must
/// stay free of any code shared with score_pair or the kernels — it is the
/// oracle they are tested against.
inline MatchResult oracle_score_dense(const SparseVector& query, const SparseVector& candidate,
                                      std::uint32_t dim) {
    for (const TermEntry& e : query.entries)
        if (e.key >= dim) throw DimensionError("dim " + std::to_string(dim) + " too small for query key " + std::to_string(e.key));
    for (const TermEntry& e : candidate.entries)
        if (e.key >= dim) throw DimensionError("dim " + std::to_string(dim) + " too small for candidate key " + std::to_string(e.key));

    std::vector<std::uint32_t> a(dim, 0), b(dim, 0);
    for (const TermEntry& e : query.entries) a[e.key] = e.value;
    for (const TermEntry& e : candidate.entries) b[e.key] = e.value;

    MatchResult r;
    r.doc_id = candidate.id;
    for (std::uint32_t i = 0; i < dim; ++i) {
        r.dot += static_cast<std::uint64_t>(a[i]) * b[i];
        r.norm_q_sq += static_cast<std::uint64_t>(a[i]) * a[i];
        r.norm_c_sq += static_cast<std::uint64_t>(b[i]) * b[i];
        if (a[i] != 0 && b[i] != 0) ++r.pp_count;
    }
    if (r.norm_q_sq == 0 || r.norm_c_sq == 0) {
        r.cosine = 0.0;
    } else {
        r.cosine = static_cast<double>(r.dot) / (std::sqrt(static_cast<double>(r.norm_q_sq)) *
                                                 std::sqrt(static_cast<double>(r.norm_c_sq)));
    }
    return r;
}

}  // namespace spm
