// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cassert>
#include <cstdint>
#include <deque>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sparsematch/codec.hpp"
#include "sparsematch/model.hpp"

namespace spm {

struct QueryTooLarge : Error {
    QueryTooLarge(std::size_t query_nnz, std::uint32_t cap)
        : Error("query has " + std::to_string(query_nnz) + " nonzeros, query memory holds " +
                std::to_string(cap)),
          nnz(query_nnz),
          capacity(cap) {}
    std::size_t nnz;
    std::uint32_t capacity;
};

// 8 KB of query memory at 4 bytes per packed entry.
inline constexpr std::uint32_t kDefaultQueryCapacity = 2048;
inline constexpr std::uint32_t kDefaultReadLatency = 2;
inline constexpr std::uint32_t kDefaultPrefetchDepth = 4;

/// The query side of a kernel: entries pinned for the whole corpus pass, with
/// the query norm precomputed at load time.
struct QueryMemory {
    std::vector<TermEntry> entries;
    std::uint32_t capacity = kDefaultQueryCapacity;
    std::uint64_t norm_q_sq = 0;
    std::uint32_t read_latency = kDefaultReadLatency;

    std::size_t size() const { return entries.size(); }
};

inline QueryMemory load_query(const SparseVector& query, std::uint32_t capacity = kDefaultQueryCapacity,
                              std::uint32_t read_latency = kDefaultReadLatency) {
    if (query.entries.size() > capacity) throw QueryTooLarge(query.entries.size(), capacity);
    QueryMemory qm;
    qm.entries = query.entries;
    qm.capacity = capacity;
    qm.read_latency = read_latency < 1 ? 1 : read_latency;
    for (const TermEntry& e : qm.entries) qm.norm_q_sq += static_cast<std::uint64_t>(e.value) * e.value;
    return qm;
}

enum class CompareAction { kAdvanceQuery, kAdvanceCandidate, kMatchBoth };

/// Mutable per-document kernel state. Accumulators reset on every document
/// header; the epoch counter only ever grows.
struct ComparatorState {
    std::size_t qp = 0;  // query pointer
    std::uint64_t epoch = 0;
    std::uint32_t current_doc = 0;
    bool doc_open = false;
    std::uint64_t dot_acc = 0;
    std::uint64_t norm_c_acc = 0;
    std::uint32_t pp_acc = 0;
    std::uint32_t prev_key = 0;  // last candidate key, for the ascending check
    bool have_prev_key = false;
};

struct KernelStats {
    std::uint64_t docs_processed = 0;
    std::uint64_t items_consumed = 0;
    std::uint64_t comparisons = 0;
    std::uint64_t partial_products = 0;
    std::uint64_t rewinds = 0;
    std::uint64_t mispredicted_prefetches = 0;
    std::uint64_t cycles = 0;  // simulation mode only

    KernelStats& operator+=(const KernelStats& o) {
        docs_processed += o.docs_processed;
        items_consumed += o.items_consumed;
        comparisons += o.comparisons;
        partial_products += o.partial_products;
        rewinds += o.rewinds;
        mispredicted_prefetches += o.mispredicted_prefetches;
        cycles += o.cycles;
        return *this;
    }

    friend bool operator==(const KernelStats&, const KernelStats&) = default;
};

/// One comparison between the query key under the query pointer and the
/// current candidate key: the smaller side advances, equal keys emit a
/// partial product and advance both.
inline CompareAction comparator_step(ComparatorState& st, const QueryMemory& qm, TermEntry candidate,
                                     KernelStats& stats) {
    const TermEntry& q = qm.entries[st.qp];
    ++stats.comparisons;
    if (q.key < candidate.key) {
        ++st.qp;
        return CompareAction::kAdvanceQuery;
    }
    if (q.key > candidate.key) return CompareAction::kAdvanceCandidate;
    st.dot_acc += static_cast<std::uint64_t>(q.value) * candidate.value;
    ++st.pp_acc;
    ++st.qp;
    return CompareAction::kMatchBoth;
}

namespace detail {

inline MatchResult make_result(const ComparatorState& st, const QueryMemory& qm) {
    MatchResult r;
    r.doc_id = st.current_doc;
    r.dot = st.dot_acc;
    r.norm_q_sq = qm.norm_q_sq;
    r.norm_c_sq = st.norm_c_acc;
    r.pp_count = st.pp_acc;
    r.cosine = cosine_score(r.dot, r.norm_q_sq, r.norm_c_sq);
    return r;
}

inline void check_ascending(ComparatorState& st, std::uint32_t key, std::size_t offset) {
    if (st.have_prev_key && st.prev_key >= key)
        throw FormatError("keys not strictly ascending", offset);
    st.prev_key = key;
    st.have_prev_key = true;
}

}  // namespace detail

/// Streaming matching kernel over an in-order item stream. Feed items with
/// consume(), close the stream with finish(); one MatchResult reaches the
/// sink per document header seen.
template <typename ResultSink>
class MatchKernel {
  public:
    MatchKernel(const QueryMemory& qm, ResultSink sink) : qm_(&qm), sink_(std::move(sink)) {}

    void consume(StreamItem item) {
        if (ended_) return;
        if (item.is_padding()) {  // padding terminates the stream
            ended_ = true;
            return;
        }
        if (item.is_header()) {
            if (st_.doc_open) end_document();
            st_.current_doc = item.pattern_id();
            st_.doc_open = true;
            st_.have_prev_key = false;
            ++stats_.docs_processed;
            ++stats_.items_consumed;
            ++offset_;
            return;
        }
        if (!st_.doc_open) throw FormatError("key/value pair before any pattern header", offset_);
        detail::check_ascending(st_, item.key(), offset_);
        const TermEntry candidate{item.key(), item.value()};
        st_.norm_c_acc += static_cast<std::uint64_t>(candidate.value) * candidate.value;
        while (st_.qp < qm_->entries.size()) {
            const CompareAction action = comparator_step(st_, *qm_, candidate, stats_);
            if (action != CompareAction::kAdvanceQuery) break;  // candidate consumed or awaited
        }
        ++stats_.items_consumed;
        ++offset_;
    }

    void consume(std::span<const StreamItem> items) {
        for (const StreamItem it : items) consume(it);
    }

    /// Ends the stream; the open document (if any) is scored and emitted.
    void finish() {
        if (st_.doc_open) end_document();
    }

    const KernelStats& stats() const { return stats_; }
    const ComparatorState& state() const { return st_; }

  private:
    void end_document() {
        sink_(detail::make_result(st_, *qm_));
        stats_.partial_products += st_.pp_acc;
        ++stats_.rewinds;
        ++st_.epoch;
        st_.qp = 0;
        st_.dot_acc = 0;
        st_.norm_c_acc = 0;
        st_.pp_acc = 0;
        st_.doc_open = false;
    }

    const QueryMemory* qm_;
    ResultSink sink_;
    ComparatorState st_;
    KernelStats stats_;
    std::size_t offset_ = 0;
    bool ended_ = false;
};

/// Direct functional form: merge-joins every document in the stream against
/// the loaded query.
inline std::pair<std::vector<MatchResult>, KernelStats> run_kernel(const QueryMemory& qm,
                                                                   std::span<const StreamItem> items) {
    std::vector<MatchResult> results;
    MatchKernel kernel(qm, [&results](const MatchResult& r) { results.push_back(r); });
    kernel.consume(items);
    kernel.finish();
    return {std::move(results), kernel.stats()};
}

// ---------------------------------------------------------------------------
// Cycle-stepped pipeline simulation
//
// Models the query-memory prefetcher: speculative sequential reads tagged with
// the epoch they were issued in, a fixed read latency, and at most `depth`
// reads in flight. A rewind bumps the epoch; reads tagged with an older epoch
// are discarded as mispredictions and never reach the comparator. The timing
// model is deliberately coarse (one comparison and one issued read per cycle);
// it exists to exercise the epoch mechanism, not to predict hardware.
// ---------------------------------------------------------------------------

struct SimEvent {
    enum class Kind { kIssue, kConsume, kDiscard, kRewind, kEmit };
    Kind kind;
    std::uint64_t cycle;
    std::size_t query_index;  // meaningful for issue/consume/discard
    std::uint64_t epoch;      // epoch the event's read was tagged with
};

using SimTrace = std::vector<SimEvent>;

inline std::string format_trace(const SimTrace& trace) {
    std::ostringstream out;
    for (const SimEvent& e : trace) {
        const char* name = "?";
        switch (e.kind) {
            case SimEvent::Kind::kIssue: name = "issue"; break;
            case SimEvent::Kind::kConsume: name = "consume"; break;
            case SimEvent::Kind::kDiscard: name = "discard"; break;
            case SimEvent::Kind::kRewind: name = "rewind"; break;
            case SimEvent::Kind::kEmit: name = "emit"; break;
        }
        out << "cycle " << e.cycle << " " << name << " idx " << e.query_index << " epoch " << e.epoch
            << "\n";
    }
    return out.str();
}

/// Stepwise pipeline form of run_kernel. Emits the identical MatchResult
/// sequence; additionally reports cycles and mispredicted prefetches.
inline std::pair<std::vector<MatchResult>, KernelStats> run_kernel_simulated(
    const QueryMemory& qm, std::span<const StreamItem> items, std::uint32_t depth = kDefaultPrefetchDepth,
    std::uint32_t read_latency = 0, SimTrace* trace = nullptr) {
    if (depth < 1) throw std::invalid_argument("prefetch depth must be >= 1");
    if (read_latency == 0) read_latency = qm.read_latency;

    struct Read {
        std::size_t idx;
        std::uint64_t epoch;
        std::uint64_t ready_at;
    };

    std::vector<MatchResult> results;
    KernelStats stats;
    ComparatorState st;
    std::deque<Read> queue;  // issued speculative reads, oldest first
    std::size_t next_fetch = 0;
    std::uint64_t cycle = 0;
    std::size_t i = 0;
    std::size_t last_checked = static_cast<std::size_t>(-1);
    const std::size_t qsize = qm.entries.size();

    auto record = [&](SimEvent::Kind kind, std::size_t idx, std::uint64_t epoch) {
        if (trace) trace->push_back(SimEvent{kind, cycle, idx, epoch});
    };

    auto end_document = [&]() {
        results.push_back(detail::make_result(st, qm));
        record(SimEvent::Kind::kEmit, 0, st.epoch);
        stats.partial_products += st.pp_acc;
        ++stats.rewinds;
        record(SimEvent::Kind::kRewind, 0, st.epoch);
        // Everything the prefetcher has in flight was speculated for the old
        // epoch; discard it all as mispredicted.
        for (const Read& r : queue) {
            ++stats.mispredicted_prefetches;
            record(SimEvent::Kind::kDiscard, r.idx, r.epoch);
        }
        queue.clear();
        next_fetch = 0;
        ++st.epoch;
        st.qp = 0;
        st.dot_acc = 0;
        st.norm_c_acc = 0;
        st.pp_acc = 0;
        st.doc_open = false;
    };

    while (true) {
        const bool at_end = i >= items.size() || items[i].is_padding();
        if (at_end && !st.doc_open) break;
        ++cycle;

        // Prefetcher: one speculative sequential read per cycle while the
        // queue has room. It assumes no rewind will happen.
        if (queue.size() < depth && next_fetch < qsize) {
            queue.push_back(Read{next_fetch, st.epoch, cycle + read_latency});
            record(SimEvent::Kind::kIssue, next_fetch, st.epoch);
            ++next_fetch;
        }

        // Comparator: at most one action per cycle.
        if (at_end) {
            end_document();
            continue;
        }
        const StreamItem item = items[i];
        if (item.is_header()) {
            if (st.doc_open) {
                end_document();
                continue;  // the header itself is consumed next cycle
            }
            st.current_doc = item.pattern_id();
            st.doc_open = true;
            st.have_prev_key = false;
            ++stats.docs_processed;
            ++stats.items_consumed;
            ++i;
            continue;
        }
        if (!st.doc_open) throw FormatError("key/value pair before any pattern header", i);
        if (last_checked != i) {  // a stalled pair is examined once
            detail::check_ascending(st, item.key(), i);
            last_checked = i;
        }
        const TermEntry candidate{item.key(), item.value()};
        if (st.qp >= qsize) {
            // Query exhausted: drain the rest of the document for its norm.
            st.norm_c_acc += static_cast<std::uint64_t>(candidate.value) * candidate.value;
            ++stats.items_consumed;
            ++i;
            continue;
        }
        if (queue.empty()) continue;  // stall: read not yet issued
        const Read front = queue.front();
        assert(front.epoch == st.epoch && front.idx == st.qp);
        if (front.ready_at > cycle) continue;  // stall: read in flight
        const CompareAction action = comparator_step(st, qm, candidate, stats);
        if (action != CompareAction::kAdvanceCandidate) {
            // The query entry was consumed by the comparison.
            record(SimEvent::Kind::kConsume, front.idx, front.epoch);
            queue.pop_front();
        }
        if (action != CompareAction::kAdvanceQuery) {
            st.norm_c_acc += static_cast<std::uint64_t>(candidate.value) * candidate.value;
            ++stats.items_consumed;
            ++i;
        }
    }

    stats.cycles = cycle;
    return {std::move(results), stats};
}

}  // namespace spm
