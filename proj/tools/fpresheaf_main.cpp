#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "fpresheaf/specdoc.hpp"
#include "fpresheaf/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"exact presheaf analyses over GF(p) on a truncated dimension window"};
    app.set_version_flag("--version", std::string("fpresheaf ") + fpre::kVersion);

    auto* run_cmd = app.add_subcommand("run", "parse a spec file and execute its analyses");
    std::string spec_path;
    fpre::spec::RunOptions opt;
    run_cmd->add_option("spec", spec_path, "path to the spec file")->required();
    run_cmd->add_option("--format", opt.format, "output format: text, csv or jsonl")
        ->check(CLI::IsMember({"text", "csv", "jsonl"}))
        ->default_val("text");
    run_cmd->add_flag("--strict", opt.strict,
                      "exit with status 3 when any analysis reports a cap or window verdict");
    run_cmd->add_option("--cache-dir", opt.cache_dir, "directory for persisted memo caches");
    run_cmd->add_option("--threads", opt.threads, "worker threads for analyses")->default_val(1);
    run_cmd->add_option("--seed", opt.seed, "seed for randomized validation schedules")
        ->default_val(0);
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        fpre::spec::SpecDocument doc = fpre::spec::parse_file(spec_path);
        fpre::spec::Report rep = fpre::spec::run(doc, opt);
        std::fputs(fpre::spec::emit(rep, opt.format).c_str(), stdout);
        if (opt.strict && rep.any_limited()) return 3;
        return 0;
    } catch (const fpre::spec::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const fpre::spec::SemanticError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const fpre::Error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
}
