#include "promptloop/gateway/request.hpp"

#include <array>

#include <json.hpp>

#include "promptloop/core/digest.hpp"
#include "promptloop/core/text.hpp"
#include "promptloop/errors.hpp"

namespace promptloop::gateway {

namespace {
constexpr std::array<std::string_view, 7> kRoleNames = {
    "generate", "evaluate", "analyze", "recommend", "refine", "vote", "summarize"};
}

std::string_view to_string(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }

Role parse_role(std::string_view name) {
    for (std::size_t i = 0; i < kRoleNames.size(); ++i)
        if (kRoleNames[i] == name) return static_cast<Role>(i);
    throw ConfigError("unknown role '" + std::string(name) + "'");
}

double RoleTemperatures::at(Role role) const noexcept {
    return const_cast<RoleTemperatures*>(this)->at(role);
}

double& RoleTemperatures::at(Role role) noexcept {
    switch (role) {
    case Role::generate: return generate;
    case Role::evaluate: return evaluate;
    case Role::analyze: return analyze;
    case Role::recommend: return recommend;
    case Role::refine: return refine;
    case Role::vote: return vote;
    case Role::summarize: return summarize;
    }
    return evaluate;
}

double default_temperature(Role role) noexcept { return RoleTemperatures{}.at(role); }

ModelRequest ModelRequest::make(Role role, std::string system, std::string user,
                                const RoleTemperatures& temps) {
    ModelRequest r;
    r.role = role;
    r.system = std::move(system);
    r.user = std::move(user);
    r.temperature = temps.at(role);
    return r;
}

void ModelRequest::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw ConfigError("temperature must lie in [0, 2]");
    if (max_output < 1) throw ConfigError("max_output must be positive");
}

std::string_view to_string(BackendKind kind) {
    switch (kind) {
    case BackendKind::http: return "http";
    case BackendKind::mock: return "mock";
    case BackendKind::cache: return "cache";
    }
    return "mock";
}

BackendKind parse_backend_kind(std::string_view name) {
    if (name == "http") return BackendKind::http;
    if (name == "mock") return BackendKind::mock;
    if (name == "cache") return BackendKind::cache;
    throw ConfigError("unknown backend kind '" + std::string(name) + "'");
}

std::string request_digest(std::string_view backend_id, const ModelRequest& request) {
    nlohmann::json j = {
        {"backend", backend_id},
        {"role", to_string(request.role)},
        {"system", request.system},
        {"user", request.user},
        {"temperature", core::text::format_double(request.temperature)},
        {"max_output", request.max_output},
        {"seed", request.seed ? nlohmann::json(*request.seed) : nlohmann::json(nullptr)},
    };
    return core::sha256_hex(j.dump());
}

std::string response_digest(std::string_view text) { return core::sha256_hex(text); }

}  // namespace promptloop::gateway
