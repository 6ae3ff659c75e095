#pragma once

#include <string>

#include "core/config.hpp"

namespace bvoc {

/// Batch steps composing the full workflow. Each validates its whole config
/// (unknown keys, parse errors, required fields) before touching the
/// filesystem, reads its inputs, then writes outputs plus a reproducibility
/// stamp. All are deterministic given the config.
void cmd_synth(const RunConfig& cfg);
void cmd_prepare(const RunConfig& cfg);
void cmd_fit_transform(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_super_resolve(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

/// Dispatch by CLI name ("synth", "fit-transform", ...). Module errors are
/// rethrown with the command name prefixed, type preserved.
void run_command(const std::string& name, const RunConfig& cfg);

} // namespace bvoc
