// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsematch/engine.hpp"

namespace spm {

enum class MetricsFormat { kJson, kText };

/// Benchmark report: totals are exact and reproducible run to run; only the
/// wall clock and the rates derived from it vary.
struct MetricsReport {
    double docs_per_sec = 0.0;
    double partial_products_per_sec = 0.0;
    std::uint64_t total_docs = 0;
    std::uint64_t total_partial_products = 0;
    double wall_seconds = 0.0;
    std::vector<KernelStats> per_kernel;
    EngineConfig config;
};

inline MetricsReport make_report(const BatchOutcome& outcome, EngineConfig config) {
    MetricsReport r;
    r.docs_per_sec = outcome.docs_per_sec;
    r.partial_products_per_sec = outcome.partial_products_per_sec;
    r.total_docs = outcome.total.docs_processed;
    r.total_partial_products = outcome.total.partial_products;
    r.wall_seconds = outcome.wall_seconds;
    r.per_kernel = outcome.per_kernel;
    config.batch = static_cast<std::uint32_t>(outcome.tables.size());
    r.config = config;
    return r;
}

inline MetricsReport make_report(const QueryOutcome& outcome, EngineConfig config) {
    MetricsReport r;
    r.docs_per_sec = outcome.docs_per_sec;
    r.partial_products_per_sec = outcome.partial_products_per_sec;
    r.total_docs = outcome.total.docs_processed;
    r.total_partial_products = outcome.total.partial_products;
    r.wall_seconds = outcome.wall_seconds;
    r.per_kernel = outcome.per_kernel;
    config.batch = 1;
    r.config = config;
    return r;
}

namespace detail {

inline nlohmann::json stats_json(const KernelStats& s) {
    return nlohmann::json{{"docs_processed", s.docs_processed},
                          {"items_consumed", s.items_consumed},
                          {"comparisons", s.comparisons},
                          {"partial_products", s.partial_products},
                          {"rewinds", s.rewinds},
                          {"mispredicted_prefetches", s.mispredicted_prefetches},
                          {"cycles", s.cycles}};
}

}  // namespace detail

inline std::string emit_metrics(const MetricsReport& r, MetricsFormat format) {
    if (format == MetricsFormat::kJson) {
        nlohmann::json j;
        j["schema"] = 1;
        j["docs_per_sec"] = r.docs_per_sec;
        j["partial_products_per_sec"] = r.partial_products_per_sec;
        j["total_docs"] = r.total_docs;
        j["total_partial_products"] = r.total_partial_products;
        j["wall_seconds"] = r.wall_seconds;
        j["per_kernel"] = nlohmann::json::array();
        for (const KernelStats& s : r.per_kernel) j["per_kernel"].push_back(detail::stats_json(s));
        j["config"] = {{"kernels", r.config.kernels},
                       {"batch", r.config.batch},
                       {"top_n", r.config.top_n},
                       {"query_capacity", r.config.query_capacity},
                       {"prefetch_depth", r.config.prefetch_depth},
                       {"read_latency", r.config.read_latency},
                       {"simulate", r.config.simulate},
                       {"page_size", r.config.page_size},
                       {"reorder_window", r.config.reorder_window}};
        return j.dump(2) + "\n";
    }

    std::ostringstream out;
    out << "docs/sec:              " << std::fixed << std::setprecision(1) << r.docs_per_sec << "\n"
        << "partial products/sec:  " << r.partial_products_per_sec << "\n"
        << "total docs:            " << r.total_docs << "\n"
        << "total partial products: " << r.total_partial_products << "\n"
        << "wall seconds:          " << std::setprecision(6) << r.wall_seconds << "\n"
        << "kernel instances:      " << r.per_kernel.size() << " (K=" << r.config.kernels
        << ", L=" << r.config.batch << ")\n";
    std::uint64_t comparisons = 0, rewinds = 0, mispredicted = 0;
    for (const KernelStats& s : r.per_kernel) {
        comparisons += s.comparisons;
        rewinds += s.rewinds;
        mispredicted += s.mispredicted_prefetches;
    }
    out << "comparisons:           " << comparisons << "\n"
        << "rewinds:               " << rewinds << "\n"
        << "mispredicted reads:    " << mispredicted << "\n";
    return out.str();
}

}  // namespace spm
