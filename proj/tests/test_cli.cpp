#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tooldec/vocab.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;  // stdout only
    std::string err;
};

std::string fixture(const std::string& name) { return std::string(TOOLDEC_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::current_path() / "cli_scratch";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Result cli(const std::string& args) {
    const fs::path err = scratch() / "stderr.txt";
    const std::string cmd = std::string("'") + TOOLDEC_BIN + "' " + args + " 2>'" + err.string() + "'";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
}

std::string q(const std::string& s) { return "'" + s + "'"; }

std::string compiled(const std::string& inventory, const std::string& name, const std::string& scaffold = "react") {
    const fs::path out = scratch() / name;
    const Result r = cli("compile --schemas " + q(fixture(inventory)) + " --vocab " + q(fixture("vocab_512.json")) +
                             " --scaffold " + scaffold + " --out " + q(out.string()));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return out.string();
}

}  // namespace

TEST_CASE("compile") {
    const fs::path out = scratch() / "fs.tdfa";
    const Result r = cli("compile --schemas " + q(fixture("flight_search.json")) + " --vocab " +
                             q(fixture("vocab_512.json")) + " --out " + q(out.string()));
    CHECK(r.code == 0);
    CHECK(r.out.find("states=") != std::string::npos);
    CHECK(r.out.find("mask_bytes=") != std::string::npos);
    CHECK(r.err.find("effective-config: tooldec compile") != std::string::npos);
    CHECK(slurp(out) == slurp(fixture("golden/flight_search.tdfa")));

    const fs::path again = scratch() / "fs2.tdfa";
    CHECK(cli("compile --schemas " + q(fixture("flight_search.json")) + " --vocab " +
                  q(fixture("vocab_512.json")) + " --out " + q(again.string()))
              .code == 0);
    CHECK(slurp(out) == slurp(again));

    const Result missing = cli("compile --schemas " + q(fixture("flight_search.json")) +
                                   " --vocab /no/such/vocab.json --out " + q((scratch() / "x.tdfa").string()));
    CHECK(missing.code == 2);
    CHECK(missing.err.find("/no/such/vocab.json") != std::string::npos);

    CHECK(cli("compile --schemas " + q(fixture("flight_search.json"))).code == 2);
    CHECK(cli("frobnicate").code == 2);
}

TEST_CASE("compile openapi input") {
    const Result r = cli("compile --format openapi-subset --schemas " + q(fixture("openapi_sample.json")) +
                             " --vocab " + q(fixture("vocab_512.json")) + " --out " +
                             q((scratch() / "oa.tdfa").string()));
    CHECK(r.code == 0);
    CHECK(cli("compile --format yaml --schemas " + q(fixture("openapi_sample.json")) + " --vocab " +
                  q(fixture("vocab_512.json")) + " --out " + q((scratch() / "oa.tdfa").string()))
              .code == 2);
}

std::string text_file(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p, std::ios::binary) << text;
    return q(p.string());
}

TEST_CASE("validate") {
    const std::string art = compiled("inventory_10.json", "inv.tdfa");
    const Result ok = cli("validate " + q(art) + " --input " +
                              text_file("ok.txt", "Thought: go\nAction: flight_search\nAction Input: "
                                                  "{\"from\": \"LAX\", \"to\": \"JFK\", \"adult\": 2}\n"));
    CHECK(ok.code == 0);
    CHECK(ok.out.find("verdict: Valid") != std::string::npos);
    CHECK(ok.out.find("fsm: accepted") != std::string::npos);

    const Result name = cli("validate " + q(art) + " --input " +
                                text_file("name.txt", "Thought: go\nAction: hotel_search\nAction Input: {}\n"));
    CHECK(name.code == 1);
    CHECK(name.out.find("verdict: NameError") != std::string::npos);
    CHECK(name.out.find("fsm: rejected") != std::string::npos);

    const std::string cut_text = "Thought: go\nAction: flight_search\nAction Input: {\"from\": \"LA";
    const Result cut = cli("validate " + q(art) + " --input " + text_file("cut.txt", cut_text));
    CHECK(cut.code == 1);
    CHECK(cut.out.find("verdict: FormatError") != std::string::npos);
    CHECK(cut.out.find("offset: " + std::to_string(cut_text.size()) + "\n") != std::string::npos);
    CHECK(cut.out.find("(truncated)") != std::string::npos);

    const Result inline_text = cli("validate " + q(art) + " --text 'Thought: no newline'");
    CHECK(inline_text.code == 1);

    CHECK(cli("validate " + q(art)).code == 2);
    CHECK(cli("validate /no/such.tdfa --text x").code == 2);
}

TEST_CASE("run") {
    const std::string art = compiled("inventory_10.json", "run.tdfa");
    const fs::path t1 = scratch() / "t1.jsonl", t2 = scratch() / "t2.jsonl";
    const Result r = cli("run " + q(art) + " --model random:1..40 --threads 4 --out " + q(t1.string()));
    REQUIRE(r.code == 0);
    const auto summary = nlohmann::json::parse(r.out);
    CHECK(summary["sessions"] == 40);
    CHECK(summary["valid"] == 40);
    CHECK(summary["error_rate"] == 0.0);

    // Same inputs, different thread count: identical transcripts.
    CHECK(cli("run " + q(art) + " --model random:1..40 --threads 1 --out " + q(t2.string())).code == 0);
    CHECK(slurp(t1) == slurp(t2));

    std::istringstream lines(slurp(t1));
    std::string line;
    std::uint64_t expected_seed = 1;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["seed"] == expected_seed++);
        for (const char* key : {"policy", "token_ids", "text", "verdict", "steps", "wall_micros"})
            CHECK(j.contains(key));
        CHECK(j["verdict"] == "Valid");
    }
    CHECK(expected_seed == 41);

    const Result adv = cli("run " + q(art) + " --model adversarial:5");
    CHECK(adv.code == 0);
    const auto adv_summary = nlohmann::json::parse(adv.out);
    CHECK(adv_summary["error_rate"] == 0.0);
    CHECK(adv_summary["zero_mass_fallbacks"].get<int>() > 0);

    CHECK(cli("run " + q(art) + " --model random:x").code == 2);
    CHECK(cli("run " + q(art) + " --model random:1 --policy beam:2").code == 2);
}

TEST_CASE("run a scripted call") {
    const std::string art = compiled("flight_search.json", "script.tdfa");
    const std::string vocab_doc = slurp(fixture("vocab_512.json"));
    const tooldec::Vocabulary v = tooldec::load_vocab(vocab_doc);
    const std::string text =
        "Thought: find flights\nAction: flight_search\nAction Input: {\"from\": \"LAX\", \"to\": \"JFK\", \"adult\": 2}\n";
    auto ids = tooldec::tokenize_greedy(v, text);
    ids.push_back(v.eos());
    const fs::path script = scratch() / "script.json";
    std::ofstream(script) << nlohmann::json(ids).dump();
    const fs::path out = scratch() / "script.jsonl";
    const Result r =
        cli("run " + q(art) + " --model " + q("script:" + script.string()) + " --policy greedy --out " +
                q(out.string()));
    CHECK(r.code == 0);
    const auto rec = nlohmann::json::parse(slurp(out));
    CHECK(rec["text"] == text);
    CHECK(rec["token_ids"] == nlohmann::json(ids));
}

TEST_CASE("render") {
    const Result r = cli("render --schemas " + q(fixture("airport_arrivals.json")));
    CHECK(r.code == 0);
    CHECK(r.out.find("   - airportcode: Airport code (Example: LHR).\n") != std::string::npos);
    CHECK(r.out.starts_with("1. airport_arrivals_for_flight_fare_search\n"));

    const Result stats =
        cli("render --schemas " + q(fixture("inventory_10.json")) + " --vocab " + q(fixture("vocab_512.json")));
    CHECK(stats.code == 0);
    CHECK(stats.out.find("tool_name\traw_tokens\tcompressed_tokens\tratio\n") != std::string::npos);
    CHECK(stats.out.find("\nflight_search\t") != std::string::npos);

    const fs::path empty = scratch() / "empty.json";
    std::ofstream(empty) << "[]";
    const Result none = cli("render --schemas " + q(empty.string()));
    CHECK(none.code == 0);
    CHECK(none.out.empty());

    const fs::path broken = scratch() / "broken.json";
    std::ofstream(broken) << "[{";
    CHECK(cli("render --schemas " + q(broken.string())).code == 2);
}

TEST_CASE("inspect") {
    const std::string art = compiled("inventory_10.json", "inspect.tdfa");
    const Result r = cli("inspect " + q(art));
    CHECK(r.code == 0);
    CHECK(r.out.find("format_version: 1\n") != std::string::npos);
    CHECK(r.out.find("tools: 10\n") != std::string::npos);
    CHECK(r.out.find("vocab_size: 512\n") != std::string::npos);
}
