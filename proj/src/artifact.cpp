#include "tooldec/artifact.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace tooldec {

ArtifactError::ArtifactError(Kind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

const char* to_string(ArtifactError::Kind kind) {
    switch (kind) {
        case ArtifactError::Kind::Corrupt: return "CorruptArtifact";
        case ArtifactError::Kind::VersionMismatch: return "VersionMismatch";
        case ArtifactError::Kind::FingerprintMismatch: return "FingerprintMismatch";
        case ArtifactError::Kind::Io: return "ArtifactIo";
    }
    return "ArtifactError";
}

namespace {

constexpr char kMagic[8] = {'T', 'O', 'O', 'L', 'D', 'E', 'C', '\0'};

class Writer {
public:
    template <class T>
    void put(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<char>(static_cast<std::uint64_t>(v) >> (8 * i)));
        }
    }
    void bytes(std::string_view b) { out_.append(b); }
    void blob(std::string_view b) {
        put<std::uint64_t>(b.size());
        bytes(b);
    }
    std::string& str() { return out_; }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}

    template <class T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    std::string_view bytes(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::string_view blob() { return bytes(get<std::uint64_t>()); }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (n > in_.size() - pos_) throw ArtifactError(ArtifactError::Kind::Corrupt, "truncated file");
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_artifact(const Vocabulary& vocab, const SessionFsm& session) {
    const TokenFsm& fsm = session.fsm();
    const auto& p = fsm.parts();
    const std::size_t states = fsm.state_count();
    Writer w;
    w.bytes({kMagic, sizeof kMagic});
    w.put<std::uint32_t>(kArtifactVersion);
    w.put<std::uint64_t>(vocab.fingerprint());
    w.put<std::uint64_t>(states);
    w.put<std::uint64_t>(fsm.vocab_size());
    w.blob(serialize_vocab(vocab));
    w.blob(serialize_inventory(session.inventory()));
    w.blob(serialize_scaffold(session.scaffold()));
    w.put<std::uint32_t>(p.eos);
    w.put<std::uint32_t>(p.start);
    for (StateId s = 0; s < states; ++s) {
        w.put<std::uint8_t>(p.accepting[s]);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(p.tags[s].segment));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(p.tags[s].tool));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(p.tags[s].anchor_progress));
        w.put<std::uint32_t>(p.byte_state[s]);
    }
    for (auto o : p.offsets) w.put<std::uint32_t>(o);
    w.put<std::uint64_t>(p.tokens.size());
    for (std::size_t i = 0; i < p.tokens.size(); ++i) {
        w.put<std::uint32_t>(p.tokens[i]);
        w.put<std::uint32_t>(p.targets[i]);
    }
    const std::size_t mask_bytes = (fsm.vocab_size() + 7) / 8;
    for (StateId s = 0; s < states; ++s) {
        const auto words = fsm.mask(s).words();
        for (std::size_t b = 0; b < mask_bytes; ++b) {
            w.put<std::uint8_t>(static_cast<std::uint8_t>(words[b / 8] >> (8 * (b % 8))));
        }
    }
    w.put<std::uint64_t>(fnv1a64(w.str()));
    return std::move(w.str());
}

Artifact load_artifact(std::string_view bytes, std::optional<std::uint64_t> expected_fingerprint) {
    using Kind = ArtifactError::Kind;
    if (bytes.size() < sizeof kMagic + 4 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        throw ArtifactError(Kind::Corrupt, "not a tooldec artifact");
    Reader r(bytes);
    r.bytes(sizeof kMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kArtifactVersion)
        throw ArtifactError(Kind::VersionMismatch, "file version " + std::to_string(version) + ", supported " +
                                                       std::to_string(kArtifactVersion));
    if (bytes.size() < 8) throw ArtifactError(Kind::Corrupt, "truncated file");
    const std::string_view body = bytes.substr(0, bytes.size() - 8);
    Reader tail(bytes.substr(bytes.size() - 8));
    if (fnv1a64(body) != tail.get<std::uint64_t>()) throw ArtifactError(Kind::Corrupt, "checksum mismatch");
    r = Reader(body);
    r.bytes(sizeof kMagic + 4);

    const auto fingerprint = r.get<std::uint64_t>();
    const auto states = r.get<std::uint64_t>();
    const auto vocab_size = r.get<std::uint64_t>();
    if (expected_fingerprint && *expected_fingerprint != fingerprint)
        throw ArtifactError(Kind::FingerprintMismatch, "artifact was compiled against a different vocabulary");
    if (states == 0 || states > body.size() || vocab_size == 0 || vocab_size > 0xffffffffu)
        throw ArtifactError(Kind::Corrupt, "implausible header");

    try {
        Vocabulary vocab = load_vocab(r.blob());
        if (vocab.fingerprint() != fingerprint || vocab.size() != vocab_size)
            throw ArtifactError(Kind::Corrupt, "embedded vocabulary disagrees with header");
        ToolInventory inventory = parse_inventory(r.blob(), InventoryFormat::SimpleJson);
        ScaffoldSpec scaffold = parse_scaffold(r.blob());

        TokenFsm::Parts p;
        p.vocab_size = vocab_size;
        p.eos = r.get<std::uint32_t>();
        p.start = r.get<std::uint32_t>();
        for (std::uint64_t s = 0; s < states; ++s) {
            p.accepting.push_back(r.get<std::uint8_t>());
            StateTag tag;
            tag.segment = static_cast<std::int32_t>(r.get<std::uint32_t>());
            tag.tool = static_cast<std::int32_t>(r.get<std::uint32_t>());
            tag.anchor_progress = static_cast<std::int32_t>(r.get<std::uint32_t>());
            p.tags.push_back(tag);
            p.byte_state.push_back(r.get<std::uint32_t>());
        }
        for (std::uint64_t i = 0; i <= states; ++i) p.offsets.push_back(r.get<std::uint32_t>());
        const auto transitions = r.get<std::uint64_t>();
        if (transitions > body.size()) throw ArtifactError(Kind::Corrupt, "implausible transition count");
        for (std::uint64_t i = 0; i < transitions; ++i) {
            p.tokens.push_back(r.get<std::uint32_t>());
            p.targets.push_back(r.get<std::uint32_t>());
        }
        if (p.eos != vocab.eos()) throw ArtifactError(Kind::Corrupt, "eos disagrees with vocabulary");
        TokenFsm fsm(std::move(p));

        const std::size_t mask_bytes = (vocab_size + 7) / 8;
        for (StateId s = 0; s < states; ++s) {
            const auto stored = r.bytes(mask_bytes);
            const auto words = fsm.mask(s).words();
            for (std::size_t b = 0; b < mask_bytes; ++b) {
                if (static_cast<std::uint8_t>(stored[b]) != static_cast<std::uint8_t>(words[b / 8] >> (8 * (b % 8))))
                    throw ArtifactError(Kind::Corrupt, "mask of state " + std::to_string(s) + " disagrees with transitions");
            }
        }
        if (!r.done()) throw ArtifactError(Kind::Corrupt, "trailing bytes");
        return Artifact{std::move(vocab), SessionFsm(std::move(fsm), std::move(inventory), std::move(scaffold))};
    } catch (const ArtifactError&) {
        throw;
    } catch (const std::exception& e) {
        throw ArtifactError(Kind::Corrupt, e.what());
    }
}

Artifact read_artifact_file(const std::filesystem::path& path, std::optional<std::uint64_t> expected_fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError(ArtifactError::Kind::Io, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_artifact(buf.str(), expected_fingerprint);
}

}  // namespace tooldec
