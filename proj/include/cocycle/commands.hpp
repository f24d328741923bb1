#pragma once

#include <ostream>

#include "cocycle/config.hpp"

namespace cocycle {

enum ExitCode : int { kPass = 0, kFail = 1, kInconclusive = 2, kConfigError = 3, kPipelineError = 4 };

int cmd_cf(const RunConfig& cfg, std::ostream& log);
int cmd_critical_set(const RunConfig& cfg, std::ostream& log);
int cmd_scan(const RunConfig& cfg, std::ostream& log);  // cfg.mode picks the scan
int cmd_schrodinger(const RunConfig& cfg, std::ostream& log);

// runs fn and maps exceptions onto exit codes, printing the message
template <class Fn>
int guarded(std::ostream& log, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kPipelineError;
    }
}

}  // namespace cocycle
