// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0
//
// Command-line driver for the sparse pattern matching engine: corpus
// encoding, synthesis, querying, benchmarking and stream inspection.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparsematch/sparsematch.hpp"

namespace {

using nlohmann::json;

spm::EncodedCorpus load_corpus(const std::string& path) {
    try {
        return spm::EncodedCorpus::from_items(spm::read_spm_file(path).items());
    } catch (const spm::Error& e) {
        throw spm::Error(path + ": " + e.what());
    }
}

spm::SparseVector decode_doc(const spm::EncodedCorpus& corpus, std::size_t ordinal) {
    if (ordinal >= corpus.num_docs())
        throw spm::Error("document ordinal " + std::to_string(ordinal) + " out of range (corpus holds " +
                         std::to_string(corpus.num_docs()) + " documents)");
    return spm::decode_stream(corpus.doc_span(ordinal)).front();
}

void print_stats(const spm::CorpusStats& s, std::ostream& out) {
    out << "documents:       " << s.num_docs << "\n"
        << "vocabulary:      " << s.vocab_size << "\n"
        << "total nonzeros:  " << s.total_nnz << "\n"
        << "avg nnz per doc: " << std::fixed << std::setprecision(2) << s.avg_nnz_per_doc << "\n"
        << "sparsity:        " << std::setprecision(6) << s.sparsity * 100.0 << " %\n"
        << "saturated:       " << s.saturated_count << "\n";
}

void print_table(const spm::TopNTable& table, std::ostream& out) {
    out << "rank  doc         cosine\n";
    for (std::size_t i = 0; i < table.size(); ++i)
        out << std::left << std::setw(6) << i + 1 << std::setw(12) << table[i].doc_id << std::fixed
            << std::setprecision(8) << table[i].cosine << "\n";
}

json table_json(const spm::TopNTable& table) {
    json arr = json::array();
    for (const spm::ScoredDoc& d : table) arr.push_back({{"doc", d.doc_id}, {"cosine", d.cosine}});
    return arr;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw spm::Error("cannot open " + path + " for writing");
    out << text;
    if (!out.good()) throw spm::Error("write failed: " + path);
}

struct EngineFlags {
    spm::EngineConfig cfg;

    void attach(CLI::App* cmd) {
        cmd->add_option("--kernels,-k", cfg.kernels, "parallel kernels (corpus partitions)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--top,-n", cfg.top_n, "results to report per query")->check(CLI::PositiveNumber);
        cmd->add_option("--capacity", cfg.query_capacity, "query memory capacity in entries")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--simulate", cfg.simulate, "run the cycle-stepped kernel pipeline");
        cmd->add_option("--depth", cfg.prefetch_depth, "prefetch queue depth (simulation)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--latency", cfg.read_latency, "query memory read latency in cycles")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--threads", cfg.max_threads, "cap on worker threads (0 = one per kernel)");
    }
};

int cmd_encode(const std::string& docword_path, const std::string& vocab_path,
               const std::string& out_path, std::uint32_t page_size) {
    std::ifstream in(docword_path);
    if (!in) throw spm::Error("cannot open " + docword_path);
    spm::UciDocword parsed = spm::parse_uci_docword(in);
    for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";

    if (!vocab_path.empty()) {
        std::ifstream vin(vocab_path);
        if (!vin) throw spm::Error("cannot open " + vocab_path);
        const auto words = spm::load_vocabulary(vin);
        if (words.size() != parsed.header.vocab_size)
            std::cerr << "warning: vocabulary file has " << words.size() << " words, header declares "
                      << parsed.header.vocab_size << "\n";
    }

    spm::CorpusBuild build = spm::build_corpus(parsed.triples);
    const auto items = spm::encode_corpus(build.docs);
    spm::write_spm_file(out_path, items, page_size);
    print_stats(spm::corpus_stats(build.docs, parsed.header.vocab_size, build.saturated_count),
                std::cout);
    std::cout << "wrote " << out_path << " (" << items.size() << " items)\n";
    return 0;
}

int cmd_stats(const std::string& corpus_path, std::uint64_t vocab_size) {
    const auto docs = spm::read_spm_corpus(corpus_path);
    std::uint64_t max_key = 0;
    for (const auto& d : docs)
        if (!d.entries.empty()) max_key = std::max<std::uint64_t>(max_key, d.entries.back().key);
    if (vocab_size == 0) vocab_size = max_key;
    print_stats(spm::corpus_stats(docs, vocab_size), std::cout);
    const double ratio = docs.empty() ? 0.0 : spm::measure_savings(docs);
    std::cout << "binary/text size:";
    if (std::isinf(ratio))
        std::cout << " n/a\n";
    else
        std::cout << " " << std::fixed << std::setprecision(3) << ratio << "\n";
    return 0;
}

int cmd_synth(const std::string& base_path, const spm::SynthParams& params, std::uint32_t vocab_bound,
              const std::string& out_path, std::uint32_t page_size) {
    const auto base = spm::read_spm_corpus(base_path);
    if (base.empty()) throw spm::EmptyBaseError("base corpus " + base_path + " holds no documents");
    std::uint32_t bound = vocab_bound;
    if (bound == 0) {
        for (const auto& d : base)
            if (!d.entries.empty()) bound = std::max(bound, d.entries.back().key);
        if (bound == 0) bound = 1;
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw spm::Error("cannot open " + out_path + " for writing");
    out.write("SPM1", 4);
    spm::write_le32(out, page_size);
    // Stream page by page; the whole target corpus never lives in memory.
    const std::size_t per_page = page_size / 4;
    std::size_t in_page = 0;
    std::uint64_t total_items = 0;
    spm::validate_synth_params(params, bound);
    for (std::uint64_t i = 0; i < params.target_docs; ++i) {
        const spm::SparseVector doc = spm::synthesize_doc(base[i % base.size()], params, i, bound);
        const auto items = spm::encode_record(doc);
        for (const spm::StreamItem it : items) {
            spm::write_le32(out, it.raw);
            if (++in_page == per_page) in_page = 0;
        }
        total_items += items.size();
    }
    if (in_page != 0)
        for (; in_page < per_page; ++in_page) spm::write_le32(out, spm::kPadWord);
    out.flush();
    if (!out.good()) throw spm::Error("write failed: " + out_path);
    std::cout << "wrote " << out_path << " (" << params.target_docs << " documents, " << total_items
              << " items)\n";
    return 0;
}

int cmd_query(const std::string& corpus_path, std::optional<std::uint64_t> query_doc,
              const std::string& query_file, const EngineFlags& flags, const std::string& json_path) {
    const spm::EncodedCorpus corpus = load_corpus(corpus_path);
    spm::SparseVector query;
    if (query_doc) {
        query = decode_doc(corpus, *query_doc);
    } else {
        const auto qs = spm::read_spm_corpus(query_file);
        if (qs.empty()) throw spm::Error(query_file + ": no query records");
        query = qs.front();
    }

    const spm::QueryOutcome outcome = spm::run_query(corpus, query, flags.cfg);
    print_table(outcome.top, std::cout);
    const spm::MetricsReport report = spm::make_report(outcome, flags.cfg);
    std::cout << spm::emit_metrics(report, spm::MetricsFormat::kText);
    if (!json_path.empty()) {
        json j = json::parse(spm::emit_metrics(report, spm::MetricsFormat::kJson));
        j["results"] = table_json(outcome.top);
        j["query_id"] = query.id;
        write_text_file(json_path, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_batch(const std::string& corpus_path, const std::string& queries_path, std::uint32_t batch,
              const EngineFlags& flags, const std::string& json_path, bool metrics_only) {
    const spm::EncodedCorpus corpus = load_corpus(corpus_path);
    std::vector<spm::SparseVector> queries = spm::read_spm_corpus(queries_path);
    if (queries.empty()) throw spm::Error(queries_path + ": no query records");
    if (batch > 0) {
        if (queries.size() < batch)
            throw spm::Error(queries_path + ": batch of " + std::to_string(batch) + " requested, file holds " +
                             std::to_string(queries.size()) + " queries");
        queries.resize(batch);
    }

    const spm::BatchOutcome outcome = spm::run_batch(corpus, queries, flags.cfg);
    if (!metrics_only) {
        for (std::size_t l = 0; l < outcome.tables.size(); ++l) {
            std::cout << "query " << queries[l].id << ":\n";
            print_table(outcome.tables[l], std::cout);
        }
    }
    const spm::MetricsReport report = spm::make_report(outcome, flags.cfg);
    std::cout << spm::emit_metrics(report, spm::MetricsFormat::kText);
    if (!json_path.empty()) {
        json j = json::parse(spm::emit_metrics(report, spm::MetricsFormat::kJson));
        j["queries"] = json::array();
        for (std::size_t l = 0; l < outcome.tables.size(); ++l)
            j["queries"].push_back({{"query_id", queries[l].id}, {"results", table_json(outcome.tables[l])}});
        write_text_file(json_path, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_protein_encode(const std::string& fasta_path, const std::string& out_path,
                       const std::string& ids_path, std::uint32_t page_size) {
    std::ifstream in(fasta_path);
    if (!in) throw spm::Error("cannot open " + fasta_path);
    const auto records = spm::parse_fasta(in);
    std::vector<spm::SparseVector> docs;
    docs.reserve(records.size());
    std::ostringstream ids;
    for (std::size_t i = 0; i < records.size(); ++i) {
        // Numeric headers become pattern ids; anything else gets the ordinal.
        std::uint32_t id = static_cast<std::uint32_t>(i);
        try {
            const unsigned long v = std::stoul(records[i].header);
            if (v <= spm::kMaxPatternId) id = static_cast<std::uint32_t>(v);
        } catch (...) {
        }
        docs.push_back(spm::protein_to_bow(records[i].sequence, id));
        ids << id << "\t" << records[i].header << "\n";
    }
    spm::write_spm_file(out_path, spm::encode_corpus(docs), page_size);
    if (!ids_path.empty()) write_text_file(ids_path, ids.str());
    std::cout << "encoded " << docs.size() << " sequences into " << out_path << "\n";
    return 0;
}

int cmd_graph_encode(const std::string& edges_path, const std::string& out_path,
                     const std::string& vocab_out, std::uint32_t page_size) {
    std::ifstream in(edges_path);
    if (!in) throw spm::Error("cannot open " + edges_path);
    const auto graphs = spm::parse_edge_lists(in);
    spm::EdgeVocabulary vocab;
    std::vector<spm::SparseVector> docs;
    docs.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i)
        docs.push_back(spm::subgraph_to_bow(graphs[i], vocab, static_cast<std::uint32_t>(i)));
    spm::write_spm_file(out_path, spm::encode_corpus(docs), page_size);
    if (!vocab_out.empty()) {
        std::ostringstream v;
        std::vector<std::pair<std::uint32_t, spm::Edge>> by_id;
        for (const auto& [edge, id] : vocab.mapping()) by_id.emplace_back(id, edge);
        std::sort(by_id.begin(), by_id.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [id, edge] : by_id) v << id << "\t" << edge.first << "\t" << edge.second << "\n";
        write_text_file(vocab_out, v.str());
    }
    std::cout << "encoded " << docs.size() << " subgraphs (" << vocab.size() << " distinct edges) into "
              << out_path << "\n";
    return 0;
}

int cmd_inspect(const std::string& corpus_path, std::uint64_t limit) {
    const spm::SpmData data = spm::read_spm_file(corpus_path);
    const auto items = data.items();
    std::size_t data_items = items.size();
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].is_padding()) {
            data_items = i;
            break;
        }
    std::cout << "page size: " << data.page_size << " bytes, pages: " << data.pages.size()
              << ", items: " << items.size() << " (" << data_items << " data)\n";
    for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
        const spm::StreamItem it = items[i];
        std::cout << std::setw(8) << i << "  0x" << std::hex << std::setw(8) << std::setfill('0')
                  << it.raw << std::dec << std::setfill(' ') << "  ";
        if (it.is_padding())
            std::cout << "padding\n";
        else if (it.is_header())
            std::cout << "header doc=" << it.pattern_id() << "\n";
        else
            std::cout << "pair key=" << it.key() << " value=" << it.value() << "\n";
    }
    if (items.size() > limit) std::cout << "... (" << items.size() - limit << " more)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse pattern matching over 32-bit encoded bag-of-words streams"};
    app.require_subcommand(1);

    // encode
    std::string docword_path, vocab_path, out_path;
    std::uint32_t page_size = spm::kDefaultPageSize;
    auto* encode = app.add_subcommand("encode", "encode a UCI docword file into .spm binary form");
    encode->add_option("--docword", docword_path, "UCI docword text file")->required();
    encode->add_option("--vocab", vocab_path, "vocabulary file (one word per line)");
    encode->add_option("--out", out_path, "output .spm path")->required();
    encode->add_option("--page-size", page_size, "page size in bytes (multiple of 4)");

    // stats
    std::string stats_corpus;
    std::uint64_t stats_vocab = 0;
    auto* stats = app.add_subcommand("stats", "report corpus statistics of an .spm file");
    stats->add_option("--corpus", stats_corpus, ".spm corpus")->required();
    stats->add_option("--vocab-size", stats_vocab, "vocabulary size (default: max key seen)");

    // synth
    std::string synth_base, synth_out;
    spm::SynthParams params;
    std::uint32_t synth_vocab = 0, synth_page = spm::kDefaultPageSize;
    auto* synth = app.add_subcommand("synth", "scale a base corpus into a synthetic one");
    synth->add_option("--base", synth_base, "base .spm corpus")->required();
    synth->add_option("--docs", params.target_docs, "documents to generate")->required();
    synth->add_option("--seed", params.seed, "generator seed");
    synth->add_option("--p-add", params.p_add, "probability of inserting a random absent word");
    synth->add_option("--p-remove", params.p_remove, "probability of deleting a random present word");
    synth->add_option("--p-recount", params.p_recount, "per-entry probability of a fresh random count");
    synth->add_option("--vocab-size", synth_vocab, "vocabulary bound (default: max key in base)");
    synth->add_option("--out", synth_out, "output .spm path")->required();
    synth->add_option("--page-size", synth_page, "page size in bytes (multiple of 4)");

    // query
    std::string query_corpus, query_file, query_json;
    std::optional<std::uint64_t> query_doc;
    EngineFlags query_flags;
    auto* query = app.add_subcommand("query", "score one query against a corpus");
    query->add_option("--corpus", query_corpus, ".spm corpus")->required();
    auto* qdoc = query->add_option("--query-doc", query_doc, "use document N of the corpus as the query");
    auto* qfile = query->add_option("--query-file", query_file, ".spm file holding the query record");
    qdoc->excludes(qfile);
    query_flags.attach(query);
    query->add_option("--json", query_json, "write results and metrics as JSON");

    // batch
    std::string batch_corpus, batch_queries, batch_json;
    std::uint32_t batch_l = 0;
    EngineFlags batch_flags;
    auto* batch = app.add_subcommand("batch", "score a batch of queries in one corpus pass");
    batch->add_option("--corpus", batch_corpus, ".spm corpus")->required();
    batch->add_option("--queries", batch_queries, ".spm file of query records")->required();
    batch->add_option("--batch,-b", batch_l, "use the first L queries (default: all)");
    batch_flags.attach(batch);
    batch->add_option("--json", batch_json, "write results and metrics as JSON");

    // bench
    std::string bench_corpus, bench_queries, bench_json;
    std::uint32_t bench_l = 0;
    EngineFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "benchmark a batch run, reporting metrics only");
    bench->add_option("--corpus", bench_corpus, ".spm corpus")->required();
    bench->add_option("--queries", bench_queries, ".spm file of query records")->required();
    bench->add_option("--batch,-b", bench_l, "use the first L queries (default: all)");
    bench_flags.attach(bench);
    bench->add_option("--json", bench_json, "write the metrics report as JSON");

    // protein-encode
    std::string fasta_path, protein_out, ids_path;
    std::uint32_t protein_page = spm::kDefaultPageSize;
    auto* protein = app.add_subcommand("protein-encode", "encode FASTA sequences as 3-mer bags");
    protein->add_option("--fasta", fasta_path, "FASTA input")->required();
    protein->add_option("--out", protein_out, "output .spm path")->required();
    protein->add_option("--ids", ids_path, "write an id-to-header map");
    protein->add_option("--page-size", protein_page, "page size in bytes (multiple of 4)");

    // graph-encode
    std::string edges_path, graph_out, vocab_out;
    std::uint32_t graph_page = spm::kDefaultPageSize;
    auto* graph = app.add_subcommand("graph-encode", "encode edge-list subgraphs as edge bags");
    graph->add_option("--edges", edges_path, "edge list (blank lines separate subgraphs)")->required();
    graph->add_option("--out", graph_out, "output .spm path")->required();
    graph->add_option("--vocab-out", vocab_out, "write the edge vocabulary");
    graph->add_option("--page-size", graph_page, "page size in bytes (multiple of 4)");

    // inspect
    std::string inspect_corpus;
    std::uint64_t inspect_limit = 64;
    auto* inspect = app.add_subcommand("inspect", "dump the items of an .spm file");
    inspect->add_option("--corpus", inspect_corpus, ".spm file")->required();
    inspect->add_option("--limit", inspect_limit, "items to dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "sparsematch: " << e.what() << "\n";
        return 2;
    }

    try {
        if (encode->parsed()) return cmd_encode(docword_path, vocab_path, out_path, page_size);
        if (stats->parsed()) return cmd_stats(stats_corpus, stats_vocab);
        if (synth->parsed()) return cmd_synth(synth_base, params, synth_vocab, synth_out, synth_page);
        if (query->parsed()) {
            if (!query_doc && query_file.empty())
                throw spm::Error("query needs --query-doc or --query-file");
            return cmd_query(query_corpus, query_doc, query_file, query_flags, query_json);
        }
        if (batch->parsed())
            return cmd_batch(batch_corpus, batch_queries, batch_l, batch_flags, batch_json, false);
        if (bench->parsed())
            return cmd_batch(bench_corpus, bench_queries, bench_l, bench_flags, bench_json, true);
        if (protein->parsed()) return cmd_protein_encode(fasta_path, protein_out, ids_path, protein_page);
        if (graph->parsed()) return cmd_graph_encode(edges_path, graph_out, vocab_out, graph_page);
        if (inspect->parsed()) return cmd_inspect(inspect_corpus, inspect_limit);
    } catch (const std::exception& e) {
        std::cerr << "sparsematch: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
