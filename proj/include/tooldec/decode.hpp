#pragma once

// Constrained decoding loop: mask the model's next-token distribution with
// the current state's token mask, renormalize, sample, transition.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tooldec/token_fsm.hpp"

namespace tooldec {

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every permitted token has probability exactly zero (strict mode only, or
// an empty mask).
class ZeroMassSupport : public DecodeError {
public:
    using DecodeError::DecodeError;
};

class StepLimitExceeded : public DecodeError {
public:
    StepLimitExceeded(std::size_t limit, std::vector<TokenId> partial);
    const std::vector<TokenId>& partial() const noexcept { return partial_; }

private:
    std::vector<TokenId> partial_;
};

class SessionFinished : public DecodeError {
public:
    SessionFinished() : DecodeError("session already reached an accepting state") {}
};

class TokenNotPermitted : public DecodeError {
public:
    TokenNotPermitted(TokenId token, StateId state);
    TokenId token() const noexcept { return token_; }

private:
    TokenId token_;
};

class DimensionMismatch : public DecodeError {
public:
    DimensionMismatch(std::size_t expected, std::size_t got);
};

enum class MaskOutcome { Normal, UniformFallback };

// out[a] = p[a] / sum of p over the mask for permitted a, 0 elsewhere. When
// that sum is 0 the result is uniform over the mask (UniformFallback), or
// ZeroMassSupport is thrown if `strict`. Sizes must equal mask.size().
MaskOutcome mask_distribution(std::span<const double> p, const TokenMask& mask, std::span<double> out,
                              bool strict = false);

struct Greedy {
    friend bool operator==(const Greedy&, const Greedy&) = default;
};
struct Temperature {
    double t = 1.0;
    std::uint64_t seed = 0;
    friend bool operator==(const Temperature&, const Temperature&) = default;
};
struct TopK {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    friend bool operator==(const TopK&, const TopK&) = default;
};
using SamplingPolicy = std::variant<Greedy, Temperature, TopK>;

// "greedy", "temperature:<t>", "top-k:<k>"; `seed` fills the stochastic ones.
SamplingPolicy parse_policy(std::string_view spec, std::uint64_t seed);
std::string to_string(const SamplingPolicy& policy);

// Draws from an already masked distribution. Owns the random stream, so
// equal seeds give equal draws on every platform.
class Sampler {
public:
    explicit Sampler(SamplingPolicy policy);

    const SamplingPolicy& policy() const noexcept { return policy_; }
    TokenId sample(std::span<const double> masked, const TokenMask& support);

private:
    double uniform();

    SamplingPolicy policy_;
    std::mt19937_64 rng_;
    std::vector<std::pair<double, TokenId>> scratch_;
    std::vector<double> powered_;
    std::vector<double> block_;
};

class LanguageModel {
public:
    virtual ~LanguageModel() = default;
    virtual std::size_t vocab_size() const = 0;
    // Next-token probabilities given the generated prefix; `out` has vocab_size() entries.
    virtual void next_distribution(std::span<const TokenId> prefix, std::span<double> out) = 0;
};

class DecodeSession {
public:
    static constexpr std::size_t kDefaultStepLimit = 512;

    explicit DecodeSession(const TokenFsm& fsm, std::size_t step_limit = kDefaultStepLimit);

    const TokenFsm& fsm() const noexcept { return *fsm_; }
    StateId state() const noexcept { return state_; }
    const std::vector<TokenId>& tokens() const noexcept { return tokens_; }
    std::size_t steps() const noexcept { return tokens_.size(); }
    std::size_t step_limit() const noexcept { return step_limit_; }
    bool finished() const { return fsm_->accepting(state_); }
    TokenMask mask() const { return fsm_->mask(state_); }
    // Bytes of the current free-text anchor matched so far, -1 outside free text.
    std::int32_t anchor_progress() const { return fsm_->tag(state_).anchor_progress; }
    std::size_t zero_mass_fallbacks() const noexcept { return fallbacks_; }

    // Caller-sampled path. Throws SessionFinished, StepLimitExceeded or
    // TokenNotPermitted; the session is unchanged on error.
    void advance(TokenId token);

    // Engine-sampled path: mask `p` into `masked`, draw, advance.
    TokenId step_with(std::span<const double> p, Sampler& sampler, std::span<double> masked, bool strict = false);

private:
    const TokenFsm* fsm_;
    StateId state_;
    std::vector<TokenId> tokens_;
    std::size_t step_limit_;
    std::size_t fallbacks_ = 0;
};

TokenId step(DecodeSession& session, LanguageModel& model, Sampler& sampler, bool strict = false);

// Steps until an accepting state. Throws StepLimitExceeded with the partial output.
std::vector<TokenId> run_to_completion(DecodeSession& session, LanguageModel& model, Sampler& sampler,
                                       bool strict = false);

bool accepts(const TokenFsm& fsm, std::span<const TokenId> tokens);

// Dirichlet(1) draw per step.
class RandomLogitModel final : public LanguageModel {
public:
    RandomLogitModel(std::size_t vocab_size, std::uint64_t seed);
    std::size_t vocab_size() const override { return size_; }
    void next_distribution(std::span<const TokenId> prefix, std::span<double> out) override;

private:
    std::size_t size_;
    std::mt19937_64 rng_;
};

// All mass on script[k] at step k; uniform once the script runs out.
class ScriptedModel final : public LanguageModel {
public:
    ScriptedModel(std::size_t vocab_size, std::vector<TokenId> script);
    std::size_t vocab_size() const override { return size_; }
    void next_distribution(std::span<const TokenId> prefix, std::span<double> out) override;

private:
    std::size_t size_;
    std::vector<TokenId> script_;
};

// All mass on a uniformly drawn token that the machine forbids right now
// (any token when nothing is forbidden).
class AdversarialModel final : public LanguageModel {
public:
    AdversarialModel(const TokenFsm& fsm, std::uint64_t seed);
    std::size_t vocab_size() const override { return fsm_->vocab_size(); }
    void next_distribution(std::span<const TokenId> prefix, std::span<double> out) override;

private:
    const TokenFsm* fsm_;
    std::mt19937_64 rng_;
};

// 53 random bits as a double in [0, 1).
double unit_double(std::mt19937_64& rng);

}  // namespace tooldec
