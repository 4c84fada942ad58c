#include <doctest.h>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fpresheaf/presheaf.hpp"
#include "fpresheaf/specdoc.hpp"

using namespace fpre;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

presheaf::EndSetTable pointed_gr_table(std::uint32_t n) {
    presheaf::EndSetTable z;
    z.n = n;
    z.size = 2;
    std::uint64_t m = linalg::hom_count(n, n);
    z.act.assign(m, std::vector<std::uint32_t>(2));
    for (std::uint64_t k = 0; k < m; ++k) {
        z.act[k][0] = 0;
        z.act[k][1] = (linalg::rank(FpMatrix::from_index(n, n, k)) == n) ? 1 : 0;
    }
    return z;
}

} // namespace

TEST_CASE("parse basics") {
    auto doc = spec::parse("set p=2 window=4\npresheaf g2 = gr(2)\nanalyze g2: degree\n");
    CHECK(doc.settings.p == 2);
    CHECK(doc.settings.window == 4);
    REQUIRE(doc.definitions.size() == 1);
    CHECK(doc.definitions[0].name == "g2");
    CHECK(doc.definitions[0].expr == "gr(2)");
    REQUIRE(doc.analyses.size() == 1);
    CHECK(doc.analyses[0].op == "degree");

    // empty document is a no-op
    auto empty = spec::parse("");
    CHECK(empty.definitions.empty());
    CHECK(empty.analyses.empty());
    auto rep = spec::run(empty, {});
    CHECK(rep.results.empty());

    // comments and blank lines are skipped
    auto doc2 = spec::parse("# leading comment\n\nset p=2 window=3 # trailing\n");
    CHECK(doc2.settings.window == 3);
}

TEST_CASE("parse and semantic errors carry locations") {
    CHECK_THROWS_AS(spec::parse("nonsense"), spec::ParseError);
    CHECK_THROWS_AS(spec::parse("analyze g2 degree"), spec::ParseError);
    CHECK_THROWS_AS(spec::parse("analyze g2: polkadots"), spec::ParseError);
    try {
        spec::parse("set p=2 window=4\nanalyze missing: growth\n");
        auto doc = spec::parse("set p=2 window=4\nanalyze missing: growth\n");
        spec::run(doc, {});
        FAIL("expected a semantic error");
    } catch (const spec::SemanticError& e) {
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
        CHECK(e.line == 2);
    }
    // duplicate names
    CHECK_THROWS_AS(spec::parse("presheaf a = gr(1)\npresheaf a = gr(2)\n"), spec::SemanticError);
    // window violation
    auto doc = spec::parse("set p=2 window=3\npresheaf x = gr_le(4)\n");
    CHECK_THROWS_AS(spec::run(doc, {}), spec::SemanticError);
}

TEST_CASE("degree analysis of gr(2)") {
    auto doc = spec::parse("set p=2 window=4\npresheaf g2 = gr(2)\nanalyze g2: degree\n");
    auto rep = spec::run(doc, {});
    REQUIRE(rep.results.size() == 1);
    CHECK(rep.results[0].jsonl.find("\"finiteness_degree\":2") != std::string::npos);
    CHECK(!rep.results[0].limited);
}

TEST_CASE("growth emission matches the documented rows") {
    auto doc = spec::parse("set p=2 window=4\npresheaf g2 = gr(2)\nanalyze g2: growth\n");
    spec::RunOptions opt;
    opt.format = "csv";
    auto rep = spec::run(doc, opt);
    std::string csv = spec::emit(rep, "csv");
    CHECK(csv.find("t,cardinality,log_p\n") != std::string::npos);
    CHECK(csv.find("0,1,0.0\n") != std::string::npos);
    CHECK(csv.find("1,1,0.0\n") != std::string::npos);
    CHECK(csv.find("2,2,1.0\n") != std::string::npos);
    CHECK(csv.find("3,8,3.0\n") != std::string::npos);
    CHECK(csv.find("4,36,5.169925001") != std::string::npos);
}

TEST_CASE("kappa analysis of the identity-functor sets") {
    auto doc = spec::parse(
        "set p=2 window=4\nlinear v = sym(1)\npresheaf sv = sets(v)\nanalyze sv: kappa(max=4)\n");
    auto rep = spec::run(doc, {});
    REQUIRE(rep.results.size() == 1);
    CHECK(rep.results[0].jsonl.find("[1,1,1,1,1]") != std::string::npos);
    CHECK(rep.results[0].csv_block.find("n,dim\n0,1\n1,1\n2,1\n3,1\n4,1\n") != std::string::npos);
}

TEST_CASE("rankfilt analysis of exterior-square sets") {
    auto doc = spec::parse(
        "set p=2 window=4\nlinear l2 = ext(2)\npresheaf x = sets(l2)\nanalyze x: rankfilt\n");
    auto rep = spec::run(doc, {});
    REQUIRE(rep.results.size() == 1);
    CHECK(rep.results[0].jsonl.find("\"regular_counts\":[1,0,1,0,28]") != std::string::npos);
    CHECK(rep.results[0].jsonl.find("\"subquotient_counts_ok\":true") != std::string::npos);
}

TEST_CASE("induced definitions read the table file") {
    presheaf::EndSetTable z = pointed_gr_table(2);
    std::string path = write_temp("fpresheaf_endset.txt", z.serialize());
    auto doc = spec::parse("set p=2 window=4\npresheaf x = induced(n=2, table=" + path +
                           ")\nanalyze x: degree\n");
    auto rep = spec::run(doc, {});
    CHECK(rep.results[0].jsonl.find("\"finiteness_degree\":2") != std::string::npos);
    std::remove(path.c_str());

    auto doc2 =
        spec::parse("set p=2 window=4\npresheaf x = induced(n=2, table=/does/not/exist)\n");
    CHECK_THROWS_AS(spec::run(doc2, {}), spec::SemanticError);
}

TEST_CASE("pgroup analyses") {
    auto doc = spec::parse(
        "set p=2 window=3\n"
        "pgroup h = heisenberg\n"
        "analyze h: pfinite\n"
        "analyze h: frattini\n"
        "analyze h: augfilt(dim=2)\n"
        "analyze h: degree\n"
        "analyze h: growth\n");
    auto rep = spec::run(doc, {});
    REQUIRE(rep.results.size() == 5);
    CHECK(rep.results[0].jsonl.find("\"verdict\":\"PFinite\"") != std::string::npos);
    CHECK(rep.results[1].jsonl.find("\"length\":2") != std::string::npos);
    CHECK(rep.results[2].jsonl.find("\"dim_I_mod_I2\":4") != std::string::npos);
    CHECK(rep.results[2].jsonl.find("\"abelianization_match\":true") != std::string::npos);
    CHECK(rep.results[3].jsonl.find("\"group_poly_degree\":2") != std::string::npos);
    CHECK(rep.results[4].jsonl.find("\"degree_fit\":\"degree 2\"") != std::string::npos);
}

TEST_CASE("zmod semantics") {
    auto ok1 = spec::parse("set p=2 window=3\npgroup a = zmod(2)\nanalyze a: pfinite\n");
    CHECK(spec::run(ok1, {}).results[0].jsonl.find("PFinite") != std::string::npos);
    auto ok2 = spec::parse("set p=2 window=3\npgroup a = zmod(4)\nanalyze a: frattini\n");
    auto rep2 = spec::run(ok2, {});
    CHECK(rep2.results[0].jsonl.find("\"length\":2") != std::string::npos);
    auto ok3 = spec::parse("set p=2 window=3\npgroup a = zmod(2^2)\nanalyze a: frattini\n");
    CHECK(spec::run(ok3, {}).results[0].jsonl == rep2.results[0].jsonl);
    auto bad = spec::parse("set p=2 window=3\npgroup a = zmod(8)\n");
    CHECK_THROWS_AS(spec::run(bad, {}), spec::SemanticError);
    auto bad2 = spec::parse("set p=2 window=3\npgroup a = zmod(3)\n");
    CHECK_THROWS_AS(spec::run(bad2, {}), spec::SemanticError);
}

TEST_CASE("hom analyses") {
    auto doc = spec::parse(
        "set p=2 window=4\n"
        "presheaf g2 = gr(2)\n"
        "linear l2 = ext(2)\n"
        "analyze g2: hom(g2)\n"
        "analyze g2: hom(l2)\n"
        "analyze l2: hom(l2)\n");
    auto rep = spec::run(doc, {});
    CHECK(rep.results[0].jsonl.find("\"count\":2") != std::string::npos); // |End(gr2)| = 2
    CHECK(rep.results[1].jsonl.find("\"log_p_count\":1") != std::string::npos);
    CHECK(rep.results[2].jsonl.find("\"nat_hom_dim\":1") != std::string::npos);
}

TEST_CASE("reports are byte-stable and thread-count independent") {
    std::string text =
        "set p=2 window=4\n"
        "presheaf g2 = gr(2)\n"
        "linear l2 = ext(2)\n"
        "presheaf x = sets(l2)\n"
        "analyze g2: growth\n"
        "analyze g2: degree\n"
        "analyze x: rankfilt\n"
        "analyze l2: degree\n";
    auto doc = spec::parse(text);
    spec::RunOptions a, b, c;
    a.threads = 1;
    b.threads = 4;
    c.threads = 1;
    c.seed = 0;
    std::string ea = spec::emit(spec::run(doc, a), "jsonl");
    std::string eb = spec::emit(spec::run(doc, b), "jsonl");
    CHECK(ea == eb);
    std::string ta = spec::emit(spec::run(doc, a), "text");
    std::string tb = spec::emit(spec::run(doc, b), "text");
    CHECK(ta == tb);
    std::string ca = spec::emit(spec::run(doc, a), "csv");
    std::string cb = spec::emit(spec::run(doc, b), "csv");
    CHECK(ca == cb);
    for (char ch : ca) CHECK(ch != '\r');
}

TEST_CASE("strict flag reflects window verdicts") {
    auto doc = spec::parse(
        "set p=2 window=4\nlinear ib = ibar\npresheaf x = sets(ib)\n"
        "analyze ib: degree\nanalyze x: growth\n");
    auto rep = spec::run(doc, {});
    REQUIRE(rep.results.size() == 2);
    CHECK(rep.results[0].limited); // ExceedsWindow
    CHECK(rep.results[0].jsonl.find("ExceedsWindow") != std::string::npos);
    CHECK(rep.results[1].limited); // NonPolynomialOnWindow
    CHECK(rep.any_limited());
    auto doc2 = spec::parse("set p=2 window=4\npresheaf g2 = gr(2)\nanalyze g2: degree\n");
    CHECK(!spec::run(doc2, {}).any_limited());
}

TEST_CASE("persisted caches round-trip and survive corruption") {
    std::string dir = (std::filesystem::temp_directory_path() / "fpresheaf_cache_test").string();
    std::filesystem::remove_all(dir);
    std::string text = "set p=2 window=3\npresheaf g2 = gr(2)\nanalyze g2: degree\n";
    auto doc = spec::parse(text);
    spec::RunOptions opt;
    opt.cache_dir = dir;
    std::string first = spec::emit(spec::run(doc, opt), "jsonl");
    CHECK(std::filesystem::exists(dir));
    std::string second = spec::emit(spec::run(doc, opt), "jsonl");
    CHECK(first == second);
    // corrupt every cache file: the run must silently rebuild and agree
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::ofstream out(entry.path(), std::ios::binary);
        out << "{corrupted";
    }
    std::string third = spec::emit(spec::run(doc, opt), "jsonl");
    CHECK(first == third);
    std::filesystem::remove_all(dir);
}
