#pragma once

// Umbrella header for the offline parts of the library. The HTTP backend lives in
// tagfeed/http_backend.hpp and must be included explicitly.

#include "tagfeed/config.hpp"
#include "tagfeed/error.hpp"
#include "tagfeed/evalstats.hpp"
#include "tagfeed/ingest.hpp"
#include "tagfeed/llm.hpp"
#include "tagfeed/preprocess.hpp"
#include "tagfeed/prompt.hpp"
#include "tagfeed/report.hpp"
#include "tagfeed/synth.hpp"
#include "tagfeed/tagger.hpp"
#include "tagfeed/taxonomy.hpp"
#include "tagfeed/text.hpp"
