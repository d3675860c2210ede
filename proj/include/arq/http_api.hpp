#pragma once

#include "arq/engine.hpp"

#include <httplib.h>

#include <string>

namespace arq {

struct ApiOptions {
    std::string static_dir;  // served at / when non-empty
    bool allow_cors = true;
};

/**
 * JSON API over an Engine:
 *
 *   GET  /healthz
 *   POST /agents                              {id?, definition} or a bare definition
 *   GET  /agents/{id}
 *   POST /sessions                            {agent_id, history?}
 *   GET  /sessions/{id}/events
 *   POST /sessions/{id}/messages              {text, mode?}
 *   GET  /sessions/{id}/turns/{turn_id}/trace
 *
 * Errors are {"error": <code>, "message": <text>} with a matching status.
 */
void register_routes(httplib::Server& server, Engine& engine, const ApiOptions& options = {});

}  // namespace arq
