// Copyright 2026 SparseMatch Project
// Licensed under the Apache License, Version 2.0
//
// End-to-end checks of the command line surface; drives the built binary
// through temp files. The binary path comes in via SPARSEMATCH_CLI_PATH.

#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "sparsematch/sparsematch.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_path() {
#ifdef SPARSEMATCH_CLI_PATH
    return SPARSEMATCH_CLI_PATH;
#else
    return "sparsematch";
#endif
}

struct RunResult {
    int status = -1;
    std::string output;  // stdout only
};

RunResult run(const std::string& args) {
    const fs::path out_file = fs::temp_directory_path() / "sparsematch_cli_out.txt";
    const std::string cmd = cli_path() + " " + args + " > " + out_file.string() + " 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_file);
    std::stringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    return r;
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / "sparsematch_cli_test";
        fs::create_directories(dir_);

        std::ofstream docword(dir_ / "docword.txt");
        docword << "3\n12\n9\n"
                << "1 1 10\n1 3 6\n1 7 5\n1 9 5\n"    // the worked document A
                << "2 1 5\n2 2 3\n2 7 4\n2 10 2\n"    // the worked document B
                << "3 11 7\n";
    }

    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, EncodeThenStats) {
    const RunResult enc = run("encode --docword " + path("docword.txt") + " --out " + path("c.spm"));
    ASSERT_EQ(enc.status, 0) << enc.output;
    EXPECT_NE(enc.output.find("documents:       3"), std::string::npos);
    EXPECT_NE(enc.output.find("total nonzeros:  9"), std::string::npos);

    // bit-exact container header
    std::ifstream in(path("c.spm"), std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    EXPECT_EQ(std::string(magic, 4), "SPM1");

    const RunResult st = run("stats --corpus " + path("c.spm") + " --vocab-size 12");
    ASSERT_EQ(st.status, 0);
    EXPECT_NE(st.output.find("documents:       3"), std::string::npos);
}

TEST_F(CliTest, QueryMatchesLibraryPipeline) {
    ASSERT_EQ(run("encode --docword " + path("docword.txt") + " --out " + path("c.spm")).status, 0);
    const RunResult q = run("query --corpus " + path("c.spm") +
                            " --query-doc 0 --kernels 2 --top 3 --json " + path("q.json"));
    ASSERT_EQ(q.status, 0) << q.output;

    std::ifstream jf(path("q.json"));
    const json j = json::parse(jf);
    EXPECT_EQ(j.at("schema").get<int>(), 1);
    ASSERT_EQ(j.at("results").size(), 3u);
    // doc 1 is the query itself; doc 2 must score 70/sqrt(186*54)
    EXPECT_EQ(j.at("results")[0].at("doc").get<unsigned>(), 1u);
    EXPECT_DOUBLE_EQ(j.at("results")[0].at("cosine").get<double>(), 1.0);

    // The CLI adds no scoring logic of its own: replay through the library.
    const spm::EncodedCorpus corpus =
        spm::EncodedCorpus::from_items(spm::read_spm_file(path("c.spm")).items());
    spm::EngineConfig cfg;
    cfg.kernels = 2;
    cfg.top_n = 3;
    const spm::QueryOutcome expected =
        spm::run_query(corpus, spm::decode_stream(corpus.doc_span(0)).front(), cfg);
    for (std::size_t i = 0; i < expected.top.size(); ++i) {
        EXPECT_EQ(j.at("results")[i].at("doc").get<std::uint32_t>(), expected.top[i].doc_id);
        EXPECT_DOUBLE_EQ(j.at("results")[i].at("cosine").get<double>(), expected.top[i].cosine);
    }
    EXPECT_EQ(j.at("total_docs").get<std::uint64_t>(), 3u);
}

TEST_F(CliTest, QueryFromFile) {
    ASSERT_EQ(run("encode --docword " + path("docword.txt") + " --out " + path("c.spm")).status, 0);
    const RunResult q = run("query --corpus " + path("c.spm") + " --query-file " + path("c.spm") +
                            " --top 1 --json " + path("qf.json"));
    ASSERT_EQ(q.status, 0) << q.output;
    std::ifstream jf(path("qf.json"));
    const json j = json::parse(jf);
    EXPECT_EQ(j.at("query_id").get<unsigned>(), 1u);  // first record of the file
    EXPECT_EQ(j.at("results")[0].at("doc").get<unsigned>(), 1u);
}

TEST_F(CliTest, SynthIsDeterministic) {
    ASSERT_EQ(run("encode --docword " + path("docword.txt") + " --out " + path("c.spm")).status, 0);
    const std::string args = "synth --base " + path("c.spm") + " --docs 100 --seed 7 --out ";
    ASSERT_EQ(run(args + path("s1.spm")).status, 0);
    ASSERT_EQ(run(args + path("s2.spm")).status, 0);

    std::ifstream a(path("s1.spm"), std::ios::binary), b(path("s2.spm"), std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_GT(sa.str().size(), 8u);

    // and the synthesized corpus decodes
    EXPECT_EQ(spm::read_spm_corpus(path("s1.spm")).size(), 100u);
}

TEST_F(CliTest, BenchWritesJsonReport) {
    ASSERT_EQ(run("encode --docword " + path("docword.txt") + " --out " + path("c.spm")).status, 0);
    ASSERT_EQ(run("synth --base " + path("c.spm") + " --docs 50 --out " + path("big.spm")).status, 0);
    const RunResult b = run("bench --corpus " + path("big.spm") + " --queries " + path("c.spm") +
                            " --batch 2 --kernels 3 --json " + path("report.json"));
    ASSERT_EQ(b.status, 0) << b.output;

    std::ifstream jf(path("report.json"));
    const json j = json::parse(jf);
    EXPECT_EQ(j.at("schema").get<int>(), 1);
    EXPECT_EQ(j.at("total_docs").get<std::uint64_t>(), 100u);  // 50 docs x 2 queries
    EXPECT_GT(j.at("docs_per_sec").get<double>(), 0.0);
    EXPECT_EQ(j.at("per_kernel").size(), 6u);
    EXPECT_EQ(j.at("queries").size(), 2u);
}

TEST_F(CliTest, ProteinAndGraphEncode) {
    std::ofstream fasta(path("p.fa"));
    fasta << ">7 test\nMKVL\n>niceheader\nAAAA\n";
    fasta.close();
    const RunResult p = run("protein-encode --fasta " + path("p.fa") + " --out " + path("p.spm") +
                            " --ids " + path("p.ids"));
    ASSERT_EQ(p.status, 0) << p.output;
    const auto docs = spm::read_spm_corpus(path("p.spm"));
    ASSERT_EQ(docs.size(), 2u);
    EXPECT_EQ(docs[0].id, 7u);   // numeric header
    EXPECT_EQ(docs[1].id, 1u);   // ordinal fallback
    EXPECT_EQ(docs[0].nnz(), 2u);
    EXPECT_EQ(docs[1].entries[0].value, 2u);

    std::ofstream edges(path("g.txt"));
    edges << "1 2\n2 3\n\n1 2\n4 5\n";
    edges.close();
    const RunResult g = run("graph-encode --edges " + path("g.txt") + " --out " + path("g.spm") +
                            " --vocab-out " + path("g.vocab"));
    ASSERT_EQ(g.status, 0) << g.output;
    const auto graphs = spm::read_spm_corpus(path("g.spm"));
    ASSERT_EQ(graphs.size(), 2u);
    EXPECT_EQ(spm::score_pair(graphs[0], graphs[1]).pp_count, 1u);  // shared edge (1,2)
}

TEST_F(CliTest, InspectDumpsItems) {
    ASSERT_EQ(run("encode --docword " + path("docword.txt") + " --out " + path("c.spm")).status, 0);
    const RunResult r = run("inspect --corpus " + path("c.spm") + " --limit 4");
    ASSERT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("header doc=1"), std::string::npos);
    EXPECT_NE(r.output.find("pair key=1 value=10"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run("no-such-command").status, 2);
    EXPECT_EQ(run("query --bogus-flag 1").status, 2);
    EXPECT_EQ(run("stats --corpus " + path("missing.spm")).status, 1);
    EXPECT_EQ(run("query --corpus " + path("missing.spm") + " --query-doc 0").status, 1);
}
