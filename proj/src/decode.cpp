#include "tooldec/decode.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace tooldec {

StepLimitExceeded::StepLimitExceeded(std::size_t limit, std::vector<TokenId> partial)
    : DecodeError("StepLimitExceeded: no accepting state within " + std::to_string(limit) + " steps"),
      partial_(std::move(partial)) {}

TokenNotPermitted::TokenNotPermitted(TokenId token, StateId state)
    : DecodeError("token " + std::to_string(token) + " is not permitted in state " + std::to_string(state)),
      token_(token) {}

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t got)
    : DecodeError("distribution has " + std::to_string(got) + " entries, vocabulary has " +
                  std::to_string(expected)) {}

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

constexpr TokenId kNoToken = 0xffffffffu;

// Unbiased draw from [0, n) by rejection.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Sum of one 64-token mask word's entries. Full words use eight interleaved
// accumulators combined in a fixed order, so the result is the same on every
// build while the additions still pipeline.
double word_sum(const double* x, std::uint64_t bits) {
    if (bits == ~std::uint64_t{0}) {
        double acc[8] = {};
        for (int j = 0; j < 64; j += 8) {
            for (int k = 0; k < 8; ++k) acc[k] += x[j + k];
        }
        return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
    }
    double s = 0.0;
    while (bits) {
        s += x[__builtin_ctzll(bits)];
        bits &= bits - 1;
    }
    return s;
}

}  // namespace

MaskOutcome mask_distribution(std::span<const double> p, const TokenMask& mask, std::span<double> out, bool strict) {
    const std::size_t n = mask.size();
    if (p.size() != n) throw DimensionMismatch(n, p.size());
    if (out.size() != n) throw DimensionMismatch(n, out.size());
    const auto words = mask.words();

    double total = 0.0;
    std::size_t permitted = 0;
    for (std::size_t w = 0; w < words.size(); ++w) {
        permitted += static_cast<std::size_t>(__builtin_popcountll(words[w]));
        total += word_sum(p.data() + w * 64, words[w]);
    }
    if (permitted == 0) throw ZeroMassSupport("ZeroMassSupport: empty mask");

    MaskOutcome outcome = MaskOutcome::Normal;
    if (!(total > 0.0)) {
        if (strict) throw ZeroMassSupport("ZeroMassSupport: every permitted token has probability 0");
        outcome = MaskOutcome::UniformFallback;
    }
    const bool normal = outcome == MaskOutcome::Normal;
    const double scale = 1.0 / total;
    const double uniform = 1.0 / static_cast<double>(permitted);
    for (std::size_t w = 0; w < words.size(); ++w) {
        const std::uint64_t bits = words[w];
        const std::size_t base = w * 64;
        const std::size_t end = std::min(base + 64, n);
        double* dst = out.data() + base;
        const double* src = p.data() + base;
        if (bits == 0) {
            std::fill(dst, out.data() + end, 0.0);
        } else if (bits == ~std::uint64_t{0}) {
            if (normal) {
                for (int j = 0; j < 64; ++j) dst[j] = src[j] * scale;
            } else {
                std::fill(dst, dst + 64, uniform);
            }
        } else {
            for (std::size_t j = 0; j < end - base; ++j) {
                const bool on = (bits >> j) & 1u;
                dst[j] = on ? (normal ? src[j] * scale : uniform) : 0.0;
            }
        }
    }
    return outcome;
}

SamplingPolicy parse_policy(std::string_view spec, std::uint64_t seed) {
    auto bad = [&] { return std::invalid_argument("bad policy '" + std::string(spec) + "'"); };
    if (spec == "greedy") return Greedy{};
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw bad();
    const std::string_view head = spec.substr(0, colon);
    const std::string value(spec.substr(colon + 1));
    if (value.empty()) throw bad();
    std::size_t used = 0;
    if (head == "temperature") {
        double t = 0;
        try {
            t = std::stod(value, &used);
        } catch (const std::exception&) {
            throw bad();
        }
        if (used != value.size() || !(t > 0.0) || !std::isfinite(t)) throw bad();
        return Temperature{t, seed};
    }
    if (head == "top-k") {
        std::size_t k = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), k);
        if (ec != std::errc{} || ptr != value.data() + value.size() || k == 0) throw bad();
        return TopK{k, seed};
    }
    throw bad();
}

std::string to_string(const SamplingPolicy& policy) {
    struct Visitor {
        std::string operator()(const Greedy&) const { return "greedy"; }
        std::string operator()(const Temperature& t) const {
            char buf[64];
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t.t);
            return "temperature:" + std::string(buf, ptr);
        }
        std::string operator()(const TopK& k) const { return "top-k:" + std::to_string(k.k); }
    };
    return std::visit(Visitor{}, policy);
}

namespace {

std::uint64_t policy_seed(const SamplingPolicy& p) {
    if (const auto* t = std::get_if<Temperature>(&p)) return t->seed;
    if (const auto* k = std::get_if<TopK>(&p)) return k->seed;
    return 0;
}

}  // namespace

Sampler::Sampler(SamplingPolicy policy) : policy_(policy), rng_(policy_seed(policy)) {}

double Sampler::uniform() { return unit_double(rng_); }

TokenId Sampler::sample(std::span<const double> masked, const TokenMask& support) {
    if (support.count() == 0) throw ZeroMassSupport("ZeroMassSupport: empty mask");

    // Argmax restricted to the support; lowest id wins ties.
    auto argmax = [&] {
        TokenId best = 0;
        double best_p = -1.0;
        support.for_each([&](TokenId a) {
            if (masked[a] > best_p) {
                best_p = masked[a];
                best = a;
            }
        });
        return best;
    };
    // Inverse-CDF draw over (weight, token) pairs in the given order.
    auto draw = [&](const std::vector<std::pair<double, TokenId>>& items) {
        double total = 0.0;
        for (const auto& [w, a] : items) total += w;
        if (!(total > 0.0)) return argmax();
        const double target = uniform() * total;
        double cum = 0.0;
        TokenId last = items.front().second;
        for (const auto& [w, a] : items) {
            if (w <= 0.0) continue;
            cum += w;
            last = a;
            if (target < cum) return a;
        }
        return last;
    };

    if (std::holds_alternative<Greedy>(policy_)) return argmax();

    if (const auto* t = std::get_if<Temperature>(&policy_)) {
        const double inv = 1.0 / t->t;
        const double* weights = masked.data();
        if (inv != 1.0) {
            powered_.resize(masked.size());
            support.for_each([&](TokenId a) { powered_[a] = std::pow(masked[a], inv); });
            weights = powered_.data();
        }
        // Inverse CDF in two levels: per-word sums first, then the tokens of
        // the word the draw lands in.
        const auto words = support.words();
        block_.resize(words.size());
        double total = 0.0;
        for (std::size_t w = 0; w < words.size(); ++w) {
            block_[w] = word_sum(weights + w * 64, words[w]);
            total += block_[w];
        }
        if (!(total > 0.0)) return argmax();
        const double target = uniform() * total;
        double cum = 0.0;
        TokenId last = kNoToken;
        for (std::size_t w = 0; w < words.size(); ++w) {
            if (block_[w] <= 0.0) continue;
            if (target < cum + block_[w]) {
                double inner = cum;
                std::uint64_t bits = words[w];
                while (bits) {
                    const auto a = static_cast<TokenId>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits)));
                    bits &= bits - 1;
                    if (weights[a] <= 0.0) continue;
                    inner += weights[a];
                    last = a;
                    if (target < inner) return a;
                }
            } else {
                std::uint64_t bits = words[w];
                // Remember the highest positive token in case rounding runs past the end.
                while (bits) {
                    const int hi = 63 - __builtin_clzll(bits);
                    const auto a = static_cast<TokenId>(w * 64 + static_cast<std::size_t>(hi));
                    if (weights[a] > 0.0) {
                        last = a;
                        break;
                    }
                    bits &= ~(std::uint64_t{1} << hi);
                }
            }
            cum += block_[w];
        }
        return last == kNoToken ? argmax() : last;
    }

    scratch_.clear();
    const std::size_t k = std::get<TopK>(policy_).k;
    support.for_each([&](TokenId a) { scratch_.emplace_back(masked[a], a); });
    const std::size_t keep = std::min(k, scratch_.size());
    std::partial_sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(keep), scratch_.end(),
                      [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
    scratch_.resize(keep);
    std::sort(scratch_.begin(), scratch_.end(), [](const auto& x, const auto& y) { return x.second < y.second; });
    return draw(scratch_);
}

DecodeSession::DecodeSession(const TokenFsm& fsm, std::size_t step_limit)
    : fsm_(&fsm), state_(fsm.start()), step_limit_(step_limit) {}

void DecodeSession::advance(TokenId token) {
    if (finished()) throw SessionFinished();
    if (tokens_.size() >= step_limit_) throw StepLimitExceeded(step_limit_, tokens_);
    const StateId next = fsm_->next(state_, token);
    if (next == kNoState) throw TokenNotPermitted(token, state_);
    state_ = next;
    tokens_.push_back(token);
}

TokenId DecodeSession::step_with(std::span<const double> p, Sampler& sampler, std::span<double> masked, bool strict) {
    if (finished()) throw SessionFinished();
    if (tokens_.size() >= step_limit_) throw StepLimitExceeded(step_limit_, tokens_);
    const TokenMask m = mask();
    if (mask_distribution(p, m, masked, strict) == MaskOutcome::UniformFallback) ++fallbacks_;
    const TokenId a = sampler.sample(masked, m);
    advance(a);
    return a;
}

TokenId step(DecodeSession& session, LanguageModel& model, Sampler& sampler, bool strict) {
    const std::size_t n = session.fsm().vocab_size();
    if (model.vocab_size() != n) throw DimensionMismatch(n, model.vocab_size());
    if (session.finished()) throw SessionFinished();
    if (session.steps() >= session.step_limit()) throw StepLimitExceeded(session.step_limit(), session.tokens());
    // Reused across steps of the same thread.
    thread_local std::vector<double> p, masked;
    p.resize(n);
    masked.resize(n);
    model.next_distribution(session.tokens(), p);
    return session.step_with(p, sampler, masked, strict);
}

std::vector<TokenId> run_to_completion(DecodeSession& session, LanguageModel& model, Sampler& sampler, bool strict) {
    while (!session.finished()) step(session, model, sampler, strict);
    return session.tokens();
}

bool accepts(const TokenFsm& fsm, std::span<const TokenId> tokens) { return fsm.accepts(tokens); }

RandomLogitModel::RandomLogitModel(std::size_t vocab_size, std::uint64_t seed) : size_(vocab_size), rng_(seed) {}

void RandomLogitModel::next_distribution(std::span<const TokenId>, std::span<double> out) {
    double total = 0.0;
    for (auto& x : out) {
        // -log(1 - u) with u in [0, 1) is Exp(1); normalized, a flat Dirichlet.
        x = -std::log1p(-unit_double(rng_));
        total += x;
    }
    for (auto& x : out) x /= total;
}

ScriptedModel::ScriptedModel(std::size_t vocab_size, std::vector<TokenId> script)
    : size_(vocab_size), script_(std::move(script)) {
    for (TokenId a : script_) {
        if (a >= size_) throw std::invalid_argument("script token out of range");
    }
}

void ScriptedModel::next_distribution(std::span<const TokenId> prefix, std::span<double> out) {
    if (prefix.size() < script_.size()) {
        std::fill(out.begin(), out.end(), 0.0);
        out[script_[prefix.size()]] = 1.0;
    } else {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    }
}

AdversarialModel::AdversarialModel(const TokenFsm& fsm, std::uint64_t seed) : fsm_(&fsm), rng_(seed) {}

void AdversarialModel::next_distribution(std::span<const TokenId> prefix, std::span<double> out) {
    StateId s = fsm_->start();
    for (TokenId a : prefix) {
        s = fsm_->next(s, a);
        if (s == kNoState) break;
    }
    const std::size_t n = fsm_->vocab_size();
    std::size_t forbidden = n;
    if (s != kNoState) forbidden -= fsm_->mask(s).count();
    std::fill(out.begin(), out.end(), 0.0);
    if (forbidden == 0) {
        out[uniform_index(rng_, n)] = 1.0;
        return;
    }
    std::uint64_t pick = uniform_index(rng_, forbidden);
    for (TokenId a = 0; a < n; ++a) {
        if (s != kNoState && fsm_->mask(s).test(a)) continue;
        if (pick-- == 0) {
            out[a] = 1.0;
            return;
        }
    }
}

}  // namespace tooldec
