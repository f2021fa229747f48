#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace promptloop::gateway {

enum class Role { generate, evaluate, analyze, recommend, refine, vote, summarize };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

/// Sampling temperature per role. The defaults are the experiment settings:
/// 0.5 for data generation, 0.0 for error analysis and refinement, 0.7 for
/// recommendations. Evaluation and voting run greedy.
struct RoleTemperatures {
    double generate = 0.5;
    double evaluate = 0.0;
    double analyze = 0.0;
    double recommend = 0.7;
    double refine = 0.0;
    double vote = 0.0;
    double summarize = 0.5;

    double at(Role role) const noexcept;
    double& at(Role role) noexcept;
};

double default_temperature(Role role) noexcept;

struct ModelRequest {
    std::string system;
    std::string user;
    double temperature = 0.0;
    int max_output = 1024;
    std::optional<std::int64_t> seed;
    Role role = Role::evaluate;

    /// Request with the role's temperature taken from `temps`.
    static ModelRequest make(Role role, std::string system, std::string user,
                             const RoleTemperatures& temps = {});

    /// Throws ConfigError when temperature is outside [0, 2] or max_output < 1.
    void validate() const;
};

struct TokenUsage {
    std::int64_t input = 0;
    std::int64_t output = 0;
};

enum class BackendKind { http, mock, cache };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);

struct ModelResponse {
    std::string text;
    TokenUsage usage;
    BackendKind backend = BackendKind::mock;
    double latency_ms = 0.0;
    /// Position of this call in its run transcript (set by the gateway).
    std::size_t transcript_index = 0;
};

/// Canonical request identity: SHA-256 over backend id, role, system, user,
/// temperature, max_output and seed.
std::string request_digest(std::string_view backend_id, const ModelRequest& request);

std::string response_digest(std::string_view text);

}  // namespace promptloop::gateway
