// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "sparsematch/model.hpp"

namespace spm {

struct EmptyBaseError : Error {
    using Error::Error;
};

/// Perturbation knobs for scaling a small corpus into a large one. Per output
/// document: one chance to insert a random absent word, one chance to delete a
/// random present word, and a per-entry chance of reassigning a random count.
struct SynthParams {
    std::uint64_t target_docs = 0;
    double p_add = 0.5;
    double p_remove = 0.5;
    double p_recount = 0.1;
    std::uint64_t seed = 1;
};

namespace detail {

// splitmix64. Fixed algorithm (not std::) so generated corpora are
// bit-identical across platforms and standard libraries.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return next_unit() < p; }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t doc_index) {
    SplitMix64 rng{seed ^ (doc_index * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull)};
    return rng.next();
}

}  // namespace detail

inline void validate_synth_params(const SynthParams& params, std::uint32_t vocab_bound) {
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!in_unit(params.p_add) || !in_unit(params.p_remove) || !in_unit(params.p_recount))
        throw std::invalid_argument("synth probabilities must lie in [0, 1]");
    if (vocab_bound == 0 || vocab_bound > kMaxWordKey)
        throw std::invalid_argument("vocabulary bound must lie in [1, 2^19)");
}

/// Generates output document `doc_index` as a perturbation of
/// base[doc_index % |base|]. Pure function of (base doc, params, doc_index,
/// vocab_bound); documents can be produced independently and in any order.
inline SparseVector synthesize_doc(const SparseVector& base_doc, const SynthParams& params,
                                   std::uint64_t doc_index, std::uint32_t vocab_bound) {
    detail::SplitMix64 rng{detail::mix_seed(params.seed, doc_index)};
    SparseVector doc;
    doc.id = static_cast<std::uint32_t>(doc_index);
    doc.entries = base_doc.entries;

    if (!doc.entries.empty() && rng.chance(params.p_remove))
        doc.entries.erase(doc.entries.begin() + static_cast<std::ptrdiff_t>(rng.below(doc.entries.size())));

    if (rng.chance(params.p_add) && doc.entries.size() < vocab_bound) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            const std::uint32_t key = 1 + static_cast<std::uint32_t>(rng.below(vocab_bound));
            const auto pos = std::lower_bound(doc.entries.begin(), doc.entries.end(), key,
                                              [](const TermEntry& e, std::uint32_t k) { return e.key < k; });
            if (pos != doc.entries.end() && pos->key == key) continue;  // already present
            doc.entries.insert(pos, TermEntry{key, 1 + static_cast<std::uint32_t>(rng.below(kMaxCount))});
            break;
        }
    }

    for (TermEntry& e : doc.entries)
        if (rng.chance(params.p_recount)) e.value = 1 + static_cast<std::uint32_t>(rng.below(kMaxCount));

    return doc;
}

/// Scales `base` to params.target_docs documents with fresh sequential ids.
/// Bit-identical output for identical inputs.
inline std::vector<SparseVector> synthesize(std::span<const SparseVector> base,
                                            const SynthParams& params, std::uint32_t vocab_bound) {
    if (base.empty()) throw EmptyBaseError("synthesize: base corpus is empty");
    validate_synth_params(params, vocab_bound);
    if (params.target_docs > static_cast<std::uint64_t>(kMaxPatternId) + 1)
        throw std::invalid_argument("target_docs exceeds the pattern id space");
    std::vector<SparseVector> out;
    out.reserve(params.target_docs);
    for (std::uint64_t i = 0; i < params.target_docs; ++i)
        out.push_back(synthesize_doc(base[i % base.size()], params, i, vocab_bound));
    return out;
}

}  // namespace spm
