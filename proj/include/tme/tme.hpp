#pragma once

// Umbrella header for the task memory engine: hierarchical task tree,
// relationship inference, prompt synthesis, token accounting, planner and
// session runtime. The network-backed model client lives separately in
// tme/live_client.hpp.

#include "tme/config.hpp"
#include "tme/embedding.hpp"
#include "tme/error.hpp"
#include "tme/planner.hpp"
#include "tme/report.hpp"
#include "tme/serialize.hpp"
#include "tme/session.hpp"
#include "tme/synthesize.hpp"
#include "tme/tokenizer.hpp"
#include "tme/transcript.hpp"
#include "tme/tree.hpp"
#include "tme/trim.hpp"
