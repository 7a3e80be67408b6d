// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sparsematch/codec.hpp"
#include "sparsematch/kernel.hpp"
#include "sparsematch/model.hpp"

namespace spm {

struct EngineConfig {
    std::uint32_t kernels = 8;  // K: corpus partitions, one kernel chain each
    std::uint32_t batch = 1;    // L: queries scored per corpus pass
    std::uint32_t top_n = 1;
    std::uint32_t query_capacity = kDefaultQueryCapacity;
    std::uint32_t prefetch_depth = kDefaultPrefetchDepth;
    std::uint32_t read_latency = kDefaultReadLatency;
    bool simulate = false;  // run the cycle-stepped kernel form
    std::uint32_t page_size = kDefaultPageSize;
    std::uint32_t reorder_window = 8;
    std::uint32_t max_threads = 0;  // 0: take SPARSEMATCH_THREADS, else one per kernel
};

struct ScoredDoc {
    std::uint32_t doc_id = 0;
    double cosine = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

/// Descending cosine, ties broken toward the smaller document id. A strict
/// total order over distinct documents, which keeps every top-N selection
/// deterministic and partition-independent.
inline bool better_match(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.doc_id < b.doc_id;
}

/// Up to top_n (doc, cosine) pairs sorted best-first.
using TopNTable = std::vector<ScoredDoc>;

/// Bounded best-N selector: a heap keyed so the weakest held entry is on top
/// and gets displaced first.
class TopNAccumulator {
  public:
    explicit TopNAccumulator(std::size_t limit) : limit_(limit) {}

    void offer(ScoredDoc d) {
        if (limit_ == 0) return;
        if (heap_.size() < limit_) {
            heap_.push_back(d);
            std::push_heap(heap_.begin(), heap_.end(), better_match);
            return;
        }
        if (!better_match(d, heap_.front())) return;
        std::pop_heap(heap_.begin(), heap_.end(), better_match);
        heap_.back() = d;
        std::push_heap(heap_.begin(), heap_.end(), better_match);
    }

    TopNTable take_sorted() {
        // sort_heap orders ascending under the comparator, i.e. best first.
        std::sort_heap(heap_.begin(), heap_.end(), better_match);
        return std::move(heap_);
    }

  private:
    std::size_t limit_;
    std::vector<ScoredDoc> heap_;
};

/// Global top-N from per-partition top-N tables, via a k-way heap merge over
/// the already-sorted partials.
inline TopNTable merge_topn(std::span<const TopNTable> partials, std::size_t top_n) {
    struct Cursor {
        const TopNTable* table;
        std::size_t pos;
    };
    auto cursor_less = [](const Cursor& a, const Cursor& b) {
        // std::*_heap keeps the largest element first; we want the best match.
        return better_match((*b.table)[b.pos], (*a.table)[a.pos]);
    };
    std::vector<Cursor> heap;
    heap.reserve(partials.size());
    for (const TopNTable& t : partials)
        if (!t.empty()) heap.push_back(Cursor{&t, 0});
    std::make_heap(heap.begin(), heap.end(), cursor_less);

    TopNTable out;
    while (!heap.empty() && out.size() < top_n) {
        std::pop_heap(heap.begin(), heap.end(), cursor_less);
        Cursor c = heap.back();
        heap.pop_back();
        out.push_back((*c.table)[c.pos]);
        if (++c.pos < c.table->size()) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end(), cursor_less);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus held in its stream encoding, indexed by document start offsets.
// Kernels consume item spans directly; nothing is re-decoded on the hot path.
// ---------------------------------------------------------------------------

struct EncodedCorpus {
    std::vector<StreamItem> items;
    std::vector<std::size_t> doc_starts;

    std::size_t num_docs() const { return doc_starts.size(); }

    std::span<const StreamItem> doc_span(std::size_t ordinal) const {
        const std::size_t begin = doc_starts[ordinal];
        const std::size_t end =
            ordinal + 1 < doc_starts.size() ? doc_starts[ordinal + 1] : items.size();
        return std::span<const StreamItem>(items.data() + begin, end - begin);
    }

    void append(const SparseVector& doc) {
        doc_starts.push_back(items.size());
        encode_append(doc, items);
    }

    static EncodedCorpus from_documents(std::span<const SparseVector> docs) {
        EncodedCorpus c;
        std::size_t total = 0;
        for (const SparseVector& d : docs) total += 1 + d.entries.size();
        c.items.reserve(total);
        c.doc_starts.reserve(docs.size());
        for (const SparseVector& d : docs) c.append(d);
        return c;
    }

    /// Adopts a raw item stream (e.g. from an .spm file): strips padding,
    /// indexes headers, rejects streams that do not start with one.
    static EncodedCorpus from_items(std::vector<StreamItem> raw) {
        EncodedCorpus c;
        c.items = std::move(raw);
        std::size_t n = c.items.size();
        for (std::size_t i = 0; i < c.items.size(); ++i) {
            if (c.items[i].is_padding()) {
                n = i;
                break;
            }
            if (c.items[i].is_header())
                c.doc_starts.push_back(i);
            else if (c.doc_starts.empty())
                throw FormatError("key/value pair before any pattern header", i);
        }
        c.items.resize(n);
        return c;
    }
};

/// Deals documents round-robin by ordinal into k streams. Every document
/// lands in exactly one partition and sizes differ by at most one.
inline std::vector<std::vector<SparseVector>> partition(std::span<const SparseVector> corpus,
                                                        std::uint32_t k) {
    if (k == 0) throw std::invalid_argument("partition: k must be >= 1");
    std::vector<std::vector<SparseVector>> parts(k);
    for (std::size_t i = 0; i < corpus.size(); ++i) parts[i % k].push_back(corpus[i]);
    return parts;
}

struct QueryOutcome {
    TopNTable top;
    std::vector<KernelStats> per_kernel;  // K entries
    KernelStats total;
    double wall_seconds = 0.0;
    double docs_per_sec = 0.0;
    double partial_products_per_sec = 0.0;
};

struct BatchOutcome {
    std::vector<TopNTable> tables;        // one per query
    std::vector<KernelStats> per_kernel;  // K*L entries, kernel-major
    KernelStats total;
    double wall_seconds = 0.0;
    double docs_per_sec = 0.0;
    double partial_products_per_sec = 0.0;
};

namespace detail {

inline std::uint32_t worker_cap(const EngineConfig& cfg) {
    if (cfg.max_threads > 0) return cfg.max_threads;
    if (const char* env = std::getenv("SPARSEMATCH_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::uint32_t>(v);
    }
    return 0;  // no cap
}

}  // namespace detail

/// Scores a batch of queries against the corpus on K*L kernel instances: the
/// corpus is dealt round-robin into K partitions, each partition is streamed
/// once and fanned out to L kernels (one per query). Workers share no mutable
/// state; results are merged deterministically afterwards, so tables do not
/// depend on scheduling, K, or thread count.
inline BatchOutcome run_batch(const EncodedCorpus& corpus, std::span<const SparseVector> queries,
                              const EngineConfig& cfg) {
    if (cfg.kernels == 0) throw std::invalid_argument("engine: kernels must be >= 1");
    if (queries.empty()) throw std::invalid_argument("engine: at least one query required");
    const std::size_t K = cfg.kernels;
    const std::size_t L = queries.size();

    std::vector<QueryMemory> qms;
    qms.reserve(L);
    for (const SparseVector& q : queries)
        qms.push_back(load_query(q, cfg.query_capacity, cfg.read_latency));

    std::vector<TopNAccumulator> accs(K * L, TopNAccumulator(cfg.top_n));
    std::vector<KernelStats> stats(K * L);

    auto run_partition = [&](std::size_t k) {
        if (!cfg.simulate) {
            using Sink = std::function<void(const MatchResult&)>;
            std::vector<MatchKernel<Sink>> sessions;
            sessions.reserve(L);
            for (std::size_t l = 0; l < L; ++l) {
                TopNAccumulator& acc = accs[k * L + l];
                sessions.emplace_back(qms[l], Sink([&acc](const MatchResult& r) {
                                          acc.offer(ScoredDoc{r.doc_id, r.cosine});
                                      }));
            }
            for (std::size_t d = k; d < corpus.num_docs(); d += K) {
                const auto span = corpus.doc_span(d);
                for (std::size_t l = 0; l < L; ++l) sessions[l].consume(span);
            }
            for (std::size_t l = 0; l < L; ++l) {
                sessions[l].finish();
                stats[k * L + l] = sessions[l].stats();
            }
        } else {
            std::vector<StreamItem> part;
            for (std::size_t d = k; d < corpus.num_docs(); d += K) {
                const auto span = corpus.doc_span(d);
                part.insert(part.end(), span.begin(), span.end());
            }
            for (std::size_t l = 0; l < L; ++l) {
                auto [results, kstats] =
                    run_kernel_simulated(qms[l], part, cfg.prefetch_depth, cfg.read_latency);
                TopNAccumulator& acc = accs[k * L + l];
                for (const MatchResult& r : results) acc.offer(ScoredDoc{r.doc_id, r.cosine});
                stats[k * L + l] = kstats;
            }
        }
    };

    const auto start = std::chrono::steady_clock::now();
    const std::uint32_t cap = detail::worker_cap(cfg);
    const std::size_t threads = cap > 0 ? std::min<std::size_t>(K, cap) : K;
    if (threads <= 1) {
        for (std::size_t k = 0; k < K; ++k) run_partition(k);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> worker_errors(threads);
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t k = t; k < K; k += threads) run_partition(k);
                } catch (...) {
                    worker_errors[t] = std::current_exception();
                }
            });
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : worker_errors)
            if (e) std::rethrow_exception(e);
    }
    const auto stop = std::chrono::steady_clock::now();

    BatchOutcome out;
    out.per_kernel = std::move(stats);
    out.tables.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        std::vector<TopNTable> partials;
        partials.reserve(K);
        for (std::size_t k = 0; k < K; ++k) partials.push_back(accs[k * L + l].take_sorted());
        out.tables.push_back(merge_topn(partials, cfg.top_n));
    }
    for (const KernelStats& s : out.per_kernel) out.total += s;
    out.wall_seconds = std::chrono::duration<double>(stop - start).count();
    if (out.wall_seconds > 0) {
        out.docs_per_sec = static_cast<double>(out.total.docs_processed) / out.wall_seconds;
        out.partial_products_per_sec =
            static_cast<double>(out.total.partial_products) / out.wall_seconds;
    }
    return out;
}

/// Single-query form: K kernels over K partitions, merged to one table.
inline QueryOutcome run_query(const EncodedCorpus& corpus, const SparseVector& query,
                              const EngineConfig& cfg) {
    const BatchOutcome batch = run_batch(corpus, std::span<const SparseVector>(&query, 1), cfg);
    QueryOutcome out;
    out.top = batch.tables.front();
    out.per_kernel = batch.per_kernel;
    out.total = batch.total;
    out.wall_seconds = batch.wall_seconds;
    out.docs_per_sec = batch.docs_per_sec;
    out.partial_products_per_sec = batch.partial_products_per_sec;
    return out;
}

}  // namespace spm
