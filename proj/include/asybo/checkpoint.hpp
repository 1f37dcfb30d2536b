#ifndef ASYBO_CHECKPOINT_HPP
#define ASYBO_CHECKPOINT_HPP

#include <string>

#include "asybo/config.hpp"
#include "asybo/driver.hpp"

namespace asybo {

/// Versioned line-delimited snapshot of a run: header, embedded effective
/// config, one record line per evaluation (normalized coordinates), then
/// counter/rng trailer lines. Written atomically (temp file + rename), so a
/// crash never leaves a half-written checkpoint behind.
void write_checkpoint(const RunState& state, const RunConfig& config, const std::string& path);

struct RestoredRun {
  RunState state;
  RunConfig config;
};

/// Rebuilds the full state, including the surrogate factor, by replaying the
/// recorded assimilation batches. Truncated or malformed files raise
/// CheckpointError naming the first bad line; a version mismatch is its own
/// explicit error.
RestoredRun restore_checkpoint(const std::string& path);

}  // namespace asybo

#endif  // ASYBO_CHECKPOINT_HPP
