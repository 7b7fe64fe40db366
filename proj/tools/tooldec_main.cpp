// tooldec: compile tool documentation into constrained-decoding artifacts,
// validate outputs, render prompts and run stub-driven decode sessions.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tooldec/artifact.hpp"
#include "tooldec/decode.hpp"
#include "tooldec/linker.hpp"
#include "tooldec/render.hpp"
#include "tooldec/validate.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tooldec;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

// Input problems that map to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw InputError("write failed for '" + path + "'");
}

std::string quote_arg(const std::string& s) {
    if (!s.empty() && s.find_first_of(" \t\n'\"\\$") == std::string::npos) return s;
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

void print_config(const std::vector<std::pair<std::string, std::string>>& args) {
    std::string line = "effective-config: tooldec";
    for (const auto& [k, v] : args) {
        if (k.empty()) line += " " + quote_arg(v);
        else if (!v.empty()) line += " " + k + " " + quote_arg(v);
    }
    std::cerr << line << "\n";
}

ToolInventory load_inventory(const std::string& path, const std::string& format) {
    auto fmt = parse_inventory_format(format);
    if (!fmt) throw InputError("unknown --format '" + format + "'");
    return parse_inventory(read_file(path), *fmt);
}

ScaffoldSpec load_scaffold(const std::string& spec) {
    if (spec == "react") return ScaffoldSpec::react();
    if (spec == "bare-call") return ScaffoldSpec::bare_call();
    return parse_scaffold(read_file(spec));
}

std::vector<TokenId> parse_token_list(const std::string& text, const std::string& origin) {
    std::vector<TokenId> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        try {
            for (const auto& v : json::parse(text)) out.push_back(v.get<TokenId>());
        } catch (const std::exception& e) {
            throw InputError(origin + ": expected a list of token ids (" + e.what() + ")");
        }
        return out;
    }
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        try {
            std::size_t used = 0;
            const unsigned long v = std::stoul(word, &used);
            if (used != word.size() || v > 0xffffffffUL) throw std::out_of_range(word);
            out.push_back(static_cast<TokenId>(v));
        } catch (const std::exception&) {
            throw InputError(origin + ": bad token id '" + word + "'");
        }
    }
    return out;
}

std::string fsm_stats_line(const FsmStats& s) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "states=%zu transitions=%zu mask_bytes=%zu build_millis=%.3f", s.state_count,
                  s.transition_count, s.mask_bytes, s.build_millis);
    return buf;
}

// --------------------------------------------------------------------------

struct CompileArgs {
    std::string schemas, vocab, scaffold = "react", format = "simple-json", out;
};

int cmd_compile(const CompileArgs& a) {
    print_config({{"", "compile"}, {"--schemas", a.schemas}, {"--vocab", a.vocab}, {"--scaffold", a.scaffold},
                  {"--format", a.format}, {"--out", a.out}});
    const Vocabulary vocab = load_vocab(read_file(a.vocab));
    const ToolInventory inventory = load_inventory(a.schemas, a.format);
    const ScaffoldSpec scaffold = load_scaffold(a.scaffold);
    spdlog::info("compiling {} tools against {} tokens", inventory.tools.size(), vocab.size());
    const SessionFsm session = build_session_fsm(inventory, vocab, scaffold);
    write_file(a.out, serialize_artifact(vocab, session));
    std::cout << "compiled " << a.out << ": tools=" << inventory.tools.size() << " vocab=" << vocab.size() << " "
              << fsm_stats_line(fsm_stats(session.fsm())) << "\n";
    return kOk;
}

// --------------------------------------------------------------------------

struct ValidateArgs {
    std::string artifact, text, input, tokens;
};

int cmd_validate(const ValidateArgs& a) {
    print_config({{"", "validate"}, {"", a.artifact}, {"--text", a.text}, {"--input", a.input},
                  {"--tokens", a.tokens}});
    const int sources = !a.text.empty() + !a.input.empty() + !a.tokens.empty();
    if (sources != 1) throw InputError("give exactly one of --text, --input, --tokens");
    const Artifact art = read_artifact_file(a.artifact);
    const TokenFsm& fsm = art.session.fsm();

    std::string text;
    std::string fsm_result;
    if (!a.tokens.empty()) {
        const auto toks = parse_token_list(read_file(a.tokens), a.tokens);
        for (TokenId t : toks) {
            if (t >= art.vocab.size()) throw InputError(a.tokens + ": token id " + std::to_string(t) + " out of range");
        }
        text = art.vocab.detokenize(toks);
        fsm_result = fsm.accepts(toks) ? "accepted" : "rejected";
    } else {
        text = a.text.empty() ? read_file(a.input) : a.text;
        try {
            auto toks = tokenize_greedy(art.vocab, text);
            toks.push_back(art.vocab.eos());
            fsm_result = fsm.accepts(toks) ? "accepted" : "rejected";
        } catch (const VocabError&) {
            fsm_result = "untokenizable";
        }
    }
    const ValidationReport r = validate_session_text(art.session.inventory(), art.session.scaffold(), text);
    std::cout << "verdict: " << to_string(r.verdict) << "\n";
    if (!r.valid()) {
        std::cout << "offset: " << r.offset << "\n";
        std::cout << "message: " << r.message << (r.truncated(text.size()) ? " (truncated)" : "") << "\n";
    }
    std::cout << "fsm: " << fsm_result << "\n";
    if (r.valid() != (fsm_result == "accepted") && fsm_result != "untokenizable") {
        spdlog::warn("oracle and automaton disagree on this input");
    }
    return r.valid() ? kOk : kInvalid;
}

// --------------------------------------------------------------------------

struct RunArgs {
    std::string artifact, model, policy = "temperature:1.0", out;
    std::size_t sessions = 0;
    std::uint64_t seed = 0;
    std::size_t step_limit = DecodeSession::kDefaultStepLimit;
    std::size_t threads = 1;
    bool timing = false;
};

struct ModelSpec {
    enum class Kind { Random, Script, Adversarial } kind;
    std::uint64_t first_seed = 0;
    std::optional<std::uint64_t> last_seed;
    std::vector<TokenId> script;
};

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size() || s.empty() || s[0] == '-') throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("bad " + what + " '" + s + "'");
    }
}

ModelSpec parse_model(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw InputError("bad --model '" + spec + "'");
    const std::string head = spec.substr(0, colon), rest = spec.substr(colon + 1);
    ModelSpec m;
    if (head == "random" || head == "adversarial") {
        m.kind = head == "random" ? ModelSpec::Kind::Random : ModelSpec::Kind::Adversarial;
        if (const auto dots = rest.find(".."); dots != std::string::npos) {
            m.first_seed = parse_u64(rest.substr(0, dots), "seed range");
            m.last_seed = parse_u64(rest.substr(dots + 2), "seed range");
            if (*m.last_seed < m.first_seed) throw InputError("empty seed range '" + rest + "'");
        } else {
            m.first_seed = parse_u64(rest, "model seed");
        }
        return m;
    }
    if (head == "script") {
        m.kind = ModelSpec::Kind::Script;
        m.script = parse_token_list(read_file(rest), rest);
        return m;
    }
    throw InputError("bad --model '" + spec + "'");
}

// Spreads the session seed and the policy seed flag into one stream seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SessionRecord {
    std::uint64_t seed = 0;
    std::vector<TokenId> tokens;
    std::string text;
    std::string verdict;
    bool valid = false;
    std::size_t fallbacks = 0;
    std::int64_t wall_micros = 0;
};

int cmd_run(const RunArgs& a) {
    const ModelSpec model = parse_model(a.model);
    std::size_t sessions = a.sessions;
    if (model.last_seed) {
        const std::size_t range = static_cast<std::size_t>(*model.last_seed - model.first_seed + 1);
        if (sessions == 0) sessions = range;
        else if (sessions != range) throw InputError("--sessions disagrees with the seed range");
    }
    if (sessions == 0) sessions = 1;
    if (a.threads == 0) throw InputError("--threads must be positive");
    // Validate once up front; per-session samplers are rebuilt from it.
    const SamplingPolicy base_policy = [&] {
        try {
            return parse_policy(a.policy, a.seed);
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }();
    print_config({{"", "run"}, {"", a.artifact}, {"--model", a.model}, {"--policy", a.policy},
                  {"--sessions", std::to_string(sessions)}, {"--seed", std::to_string(a.seed)},
                  {"--step-limit", std::to_string(a.step_limit)}, {"--threads", std::to_string(a.threads)},
                  {"--out", a.out}});

    const Artifact art = read_artifact_file(a.artifact);
    const SessionFsm& session_fsm = art.session;
    const TokenFsm& fsm = session_fsm.fsm();

    std::vector<SessionRecord> records(sessions);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sessions; i = next++) {
            SessionRecord& rec = records[i];
            rec.seed = model.kind == ModelSpec::Kind::Script ? a.seed : model.first_seed + i;
            std::unique_ptr<LanguageModel> lm;
            switch (model.kind) {
                case ModelSpec::Kind::Random: lm = std::make_unique<RandomLogitModel>(fsm.vocab_size(), rec.seed); break;
                case ModelSpec::Kind::Adversarial: lm = std::make_unique<AdversarialModel>(fsm, rec.seed); break;
                case ModelSpec::Kind::Script: lm = std::make_unique<ScriptedModel>(fsm.vocab_size(), model.script); break;
            }
            SamplingPolicy policy = base_policy;
            if (auto* t = std::get_if<Temperature>(&policy)) t->seed = mix_seed(rec.seed, a.seed);
            if (auto* k = std::get_if<TopK>(&policy)) k->seed = mix_seed(rec.seed, a.seed);
            Sampler sampler(policy);
            DecodeSession session(fsm, a.step_limit);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                run_to_completion(session, *lm, sampler);
                rec.tokens = session.tokens();
                rec.text = art.vocab.detokenize(rec.tokens);
                const ValidationReport r =
                    validate_session_text(session_fsm.inventory(), session_fsm.scaffold(), rec.text);
                rec.valid = r.valid() && fsm.accepts(rec.tokens) && rec.tokens.back() == art.vocab.eos();
                rec.verdict = to_string(r.verdict);
            } catch (const StepLimitExceeded& e) {
                rec.tokens = e.partial();
                rec.text = art.vocab.detokenize(rec.tokens);
                rec.verdict = "StepLimitExceeded";
            }
            const auto t1 = std::chrono::steady_clock::now();
            rec.fallbacks = session.zero_mass_fallbacks();
            if (a.timing) rec.wall_micros = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
            spdlog::debug("session {} seed {} -> {} in {} steps", i, rec.seed, rec.verdict, rec.tokens.size());
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::min(a.threads, sessions); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t valid = 0, fallbacks = 0;
    std::string out;
    const std::string policy_name = to_string(base_policy);
    for (const auto& rec : records) {
        valid += rec.valid;
        fallbacks += rec.fallbacks;
        json j;
        j["seed"] = rec.seed;
        j["policy"] = policy_name;
        j["token_ids"] = rec.tokens;
        j["text"] = rec.text;
        j["verdict"] = rec.verdict;
        j["steps"] = rec.tokens.size();
        j["wall_micros"] = rec.wall_micros;
        j["zero_mass_fallbacks"] = rec.fallbacks;
        out += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    }
    if (!a.out.empty()) write_file(a.out, out);

    json summary;
    summary["sessions"] = sessions;
    summary["valid"] = valid;
    summary["invalid"] = sessions - valid;
    summary["error_rate"] = static_cast<double>(sessions - valid) / static_cast<double>(sessions);
    summary["zero_mass_fallbacks"] = fallbacks;
    std::cout << summary.dump() << "\n";
    return valid == sessions ? kOk : kInvalid;
}

// --------------------------------------------------------------------------

struct RenderArgs {
    std::string schemas, vocab, format = "simple-json";
};

int cmd_render(const RenderArgs& a) {
    print_config({{"", "render"}, {"--schemas", a.schemas}, {"--vocab", a.vocab}, {"--format", a.format}});
    const ToolInventory inventory = load_inventory(a.schemas, a.format);
    std::cout << render_compressed(inventory);
    if (!a.vocab.empty()) {
        const Vocabulary vocab = load_vocab(read_file(a.vocab));
        std::cout << "\n" << format_stats_table(token_stats(inventory, vocab));
    }
    return kOk;
}

int cmd_inspect(const std::string& path) {
    print_config({{"", "inspect"}, {"", path}});
    const Artifact art = read_artifact_file(path);
    const TokenFsm& fsm = art.session.fsm();
    char fp[32];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(art.vocab.fingerprint()));
    std::cout << "format_version: " << kArtifactVersion << "\n"
              << "vocab_fingerprint: " << fp << "\n"
              << "vocab_size: " << art.vocab.size() << "\n"
              << "eos: " << art.vocab.eos() << "\n"
              << "tools: " << art.session.inventory().tools.size() << "\n";
    for (const auto& t : art.session.inventory().tools) std::cout << "  - " << t.tool_name << "\n";
    std::cout << "scaffold: " << serialize_scaffold(art.session.scaffold()) << "\n"
              << fsm_stats_line(fsm_stats(fsm)) << "\n"
              << "free_text_states: " << fsm.free_text_states().size() << "\n";
    return kOk;
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("tooldec");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("TOOLDEC_LOG"); env && *env) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Compile tool documentation into constrained-decoding machines and drive them."};
    app.require_subcommand(1);

    CompileArgs ca;
    auto* compile = app.add_subcommand("compile", "Build a session artifact from schemas and a vocabulary");
    compile->add_option("--schemas", ca.schemas, "Tool inventory document")->required();
    compile->add_option("--vocab", ca.vocab, "Vocabulary file")->required();
    compile->add_option("--scaffold", ca.scaffold, "Scaffold file, or 'react' / 'bare-call'");
    compile->add_option("--format", ca.format, "simple-json or openapi-subset");
    compile->add_option("--out", ca.out, "Artifact path")->required();

    ValidateArgs va;
    auto* validate = app.add_subcommand("validate", "Check a generated output against an artifact");
    validate->add_option("artifact", va.artifact, "Compiled artifact")->required();
    validate->add_option("--text", va.text, "Output text (without EOS)");
    validate->add_option("--input", va.input, "File holding the output text");
    validate->add_option("--tokens", va.tokens, "File holding token ids");

    RunArgs ra;
    auto* run = app.add_subcommand("run", "Decode sessions with a stub model");
    run->add_option("artifact", ra.artifact, "Compiled artifact")->required();
    run->add_option("--model", ra.model, "random:<seed>|random:<a>..<b>|adversarial:<seed>|script:<file>")->required();
    run->add_option("--policy", ra.policy, "greedy | temperature:<t> | top-k:<k>");
    run->add_option("--sessions", ra.sessions, "Number of sessions");
    run->add_option("--seed", ra.seed, "Sampling seed");
    run->add_option("--step-limit", ra.step_limit, "Maximum tokens per session");
    run->add_option("--threads", ra.threads, "Worker threads");
    run->add_option("--out", ra.out, "Transcript file (one JSON record per line)");
    run->add_flag("--timing", ra.timing, "Record wall-clock time per session");

    RenderArgs rea;
    auto* render = app.add_subcommand("render", "Print the compressed tool prompt");
    render->add_option("--schemas", rea.schemas, "Tool inventory document")->required();
    render->add_option("--vocab", rea.vocab, "Vocabulary for token statistics");
    render->add_option("--format", rea.format, "simple-json or openapi-subset");

    std::string inspect_path;
    auto* inspect = app.add_subcommand("inspect", "Describe a compiled artifact");
    inspect->add_option("artifact", inspect_path, "Compiled artifact")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*compile) return cmd_compile(ca);
        if (*validate) return cmd_validate(va);
        if (*run) return cmd_run(ra);
        if (*render) return cmd_render(rea);
        if (*inspect) return cmd_inspect(inspect_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
